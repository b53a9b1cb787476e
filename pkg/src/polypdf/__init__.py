"""Polynomial probability distributions on finite supports."""

from .certify import (
    NonNegativityReport,
    Verdict,
    certify_nonneg_sturm,
    classify_roots_theorem1,
    numeric_negativity_report,
)
from .distribution import (
    Certificate,
    PolynomialPdf,
    convolve,
    entropy,
    extrema,
    kl_divergence,
    make_pdf,
    mixture,
    posterior_product,
    uniform,
)
from .estimation import PolynomialDensityEstimator, SampleSet, fisher_information
from .exceptions import FormatError, PolyPdfError
from .fitting import FitConfig, Histogram, PolynomialPdfRegressor, fit
from .piecewise import ControlPoints, PiecewisePdf, build
from .polycore import FactoredPolynomial, Interval, Polynomial
from .sampling import GeneratorState, sample
from .transform import MonotoneMap, TransformedDensity, monotone_transform

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "ControlPoints",
    "FactoredPolynomial",
    "FitConfig",
    "FormatError",
    "GeneratorState",
    "Histogram",
    "Interval",
    "MonotoneMap",
    "NonNegativityReport",
    "PiecewisePdf",
    "PolyPdfError",
    "Polynomial",
    "PolynomialDensityEstimator",
    "PolynomialPdf",
    "PolynomialPdfRegressor",
    "SampleSet",
    "TransformedDensity",
    "Verdict",
    "build",
    "certify_nonneg_sturm",
    "classify_roots_theorem1",
    "convolve",
    "entropy",
    "extrema",
    "fisher_information",
    "fit",
    "kl_divergence",
    "make_pdf",
    "mixture",
    "monotone_transform",
    "numeric_negativity_report",
    "posterior_product",
    "sample",
    "uniform",
]
