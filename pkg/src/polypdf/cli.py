"""Command line front end.

Exit status is 0 on success, 2 when an input fails validation (a JSON
object ``{"kind", "detail", "witness"}`` goes to stderr) and 1 on I/O or
parse errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from . import io as pio
from .certify import classify_roots_theorem1, numeric_negativity_report
from .distribution import PolynomialPdf, convolve, entropy, extrema, kl_divergence
from .estimation import (SampleSet, method_of_moments, ml_centroid, ml_numeric, ml_pairwise,
                         sample_moments)
from .exceptions import DomainError, FormatError, PolyPdfError
from .fitting import FitConfig, fit
from .piecewise import PiecewisePdf, build
from .polycore import Interval, form1_to_form2
from .sampling import GeneratorState, build_envelope, inverse_cdf_sample, rejection_sample
from .transform import TransformedDensity, parse_transform

log = logging.getLogger("polypdf")


def _support(text: str) -> Interval:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"support must be 'l,u', got {text!r}")
    if not lo < hi:
        raise argparse.ArgumentTypeError("support needs lower < upper")
    return Interval(lo, hi)


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _load_density(path):
    d = pio.density_from_dict(pio.read_json(path))
    if not isinstance(d, (PolynomialPdf, PiecewisePdf)):
        raise DomainError("this command needs a density on a finite support; "
                          "use the 'base' density of a transformed file")
    return d


def _load_pdf(path) -> PolynomialPdf:
    return pio.pdf_from_dict(pio.read_json(path))


def _finite(v):
    return v if isinstance(v, float) and math.isfinite(v) else None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_fit(a):
    h = pio.read_histogram_csv(a.input)
    support = a.support if a.support is not None else h.bin_support()
    d = fit(h, FitConfig(a.degree, support, a.method, a.repair))
    pio.write_json(a.output, pio.pdf_to_dict(d))


def cmd_validate(a):
    obj = pio.read_json(a.pdf)
    d = pio.pdf_from_dict(obj)  # raises negativity / mass errors
    out = {"valid": True, "certificate": d.certificate.value, "degree": d.degree}
    if a.method == "theorem1" and d.degree >= 1:
        out["theorem1"] = classify_roots_theorem1(form1_to_form2(d.poly), d.support).to_dict()
    elif a.method == "numeric":
        out["numeric"] = numeric_negativity_report(d.poly, d.support).to_dict()
    pio.write_json(a.output, out)


def cmd_stats(a):
    d = _load_density(a.pdf)
    out = {"mean": d.mean(), "variance": d.variance(), "median": float(d.quantile(0.5)),
           "entropy": d.entropy()}
    if isinstance(d, PolynomialPdf):
        out["degree"] = d.degree
        if d.degree >= 1:
            out["extrema"] = [{"x": e.x, "kind": e.kind, "boundary": e.boundary} for e in extrema(d)]
    pio.write_json(a.output, out)


def cmd_kl(a):
    v = kl_divergence(_load_pdf(a.p), _load_pdf(a.q))
    pio.write_json(a.output, {"kl": _finite(v), "divergent": not math.isfinite(v)})


def cmd_entropy(a):
    pio.write_json(a.output, {"entropy": _load_density(a.pdf).entropy()})


def cmd_transform(a):
    res = parse_transform(a.to, _load_pdf(a.pdf))
    if isinstance(res, TransformedDensity):
        obj = res.to_dict()
        obj["support"] = {"lower": res.support[0] if math.isfinite(res.support[0]) else None,
                          "upper": res.support[1] if math.isfinite(res.support[1]) else None}
        pio.write_json(a.output, obj)
    elif isinstance(res, PiecewisePdf):
        pio.write_json(a.output, res.to_dict())
    else:
        pio.write_json(a.output, pio.pdf_to_dict(res))


def cmd_piecewise(a):
    cp = pio.read_control_points_csv(a.input)
    pp = build(cp, a.degree, a.smoothness, a.samples)
    pio.write_json(a.output, pp.to_dict())


def cmd_estimate(a):
    x = pio.read_samples_csv(a.input)
    s = SampleSet(x, a.support)
    if a.method == "mom":
        K = a.degree if a.moments is None else a.moments
        rep = method_of_moments(sample_moments(x, max(K, 1)), a.degree, s.support, samples=s)
    elif a.method == "ml":
        rep = ml_numeric(s, a.degree)
    elif a.method == "centroid":
        rep = ml_centroid(s, a.degree)
    else:
        if s.M % 2:
            log.warning("dropping the last observation to form pairs")
            s = SampleSet(x[:-1], a.support)
        rep = ml_pairwise(s, a.degree)
    pio.write_json(a.output, rep.to_dict())


def cmd_sample(a):
    d = _load_density(a.pdf)
    g = GeneratorState(a.seed)
    if a.method == "inverse":
        x = inverse_cdf_sample(d, g, a.count, a.grid)
    else:
        env = build_envelope(d, d.support, a.cells, a.envelope)
        res = rejection_sample(d, env, g, a.count)
        log.info("acceptance rate %.6f", res.acceptance_rate)
        x = res.samples
    out = sys.stdout if a.output in (None, "-") else open(a.output, "w")
    try:
        out.write("".join(f"{float(v)!r}\n" for v in x))
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_plot_data(a):
    d = _load_density(a.pdf)
    lo, hi = d.support
    x = np.linspace(lo, hi, a.resolution + 1)
    x[-1] = hi
    dens = np.asarray(d.pdf(x), dtype=float)
    F = np.asarray(d.cdf(x), dtype=float)
    pio.write_csv(a.output, ["x", "density", "cdf"], zip(x, dens, F))


def cmd_convolve(a):
    pio.write_json(a.output, convolve(_load_pdf(a.p), _load_pdf(a.q)).to_dict())


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polypdf", description="Polynomial probability densities.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--output", "-o", default=None, help="output path (default stdout)")
        return p

    p = add("fit", cmd_fit, "fit a density to a histogram CSV")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--degree", "-n", type=int, required=True)
    p.add_argument("--support", type=_support, default=None)
    p.add_argument("--method", choices=["ls", "lagrange", "squared"], default="ls")
    p.add_argument("--repair", action="store_true", help="lift a negative fit instead of failing")

    p = add("validate", cmd_validate, "check a density file")
    p.add_argument("--pdf", required=True)
    p.add_argument("--method", choices=["sturm", "theorem1", "numeric"], default="sturm")

    p = add("stats", cmd_stats, "moments, median, entropy and extrema")
    p.add_argument("--pdf", required=True)

    p = add("kl", cmd_kl, "Kullback-Leibler divergence KL(p || q)")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)

    p = add("entropy", cmd_entropy, "differential entropy")
    p.add_argument("--pdf", required=True)

    p = add("transform", cmd_transform, "change of variable")
    p.add_argument("--pdf", required=True)
    p.add_argument("--to", required=True, help="unit | semi-infinite | real-line | affine:b1,b0")

    p = add("piecewise", cmd_piecewise, "piecewise density through control points")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--degree", "-n", type=int, default=None)
    p.add_argument("--smoothness", "-C", type=int, default=1)
    p.add_argument("--samples", "-K", type=int, default=25)

    p = add("estimate", cmd_estimate, "estimate coefficients from samples")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--degree", "-n", type=int, required=True)
    p.add_argument("--support", type=_support, required=True)
    p.add_argument("--method", choices=["mom", "ml", "centroid", "pairwise"], default="mom")
    p.add_argument("--moments", type=_positive_int, default=None)

    p = add("sample", cmd_sample, "draw variates, one per line")
    p.add_argument("--pdf", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=_positive_int, default=1000)
    p.add_argument("--method", choices=["inverse", "rejection"], default="inverse")
    p.add_argument("--grid", type=int, default=1024)
    p.add_argument("--cells", type=_positive_int, default=64)
    p.add_argument("--envelope", choices=["step", "linear"], default="step")

    p = add("plot-data", cmd_plot_data, "CSV of x, density, cdf")
    p.add_argument("--pdf", required=True)
    p.add_argument("--resolution", type=_positive_int, default=200)

    p = add("convolve", cmd_convolve, "density of the sum of two independent variables")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    return ap


def _fail(kind_dict, code):
    sys.stderr.write(json.dumps(kind_dict) + "\n")
    return code


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 1
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except PolyPdfError as exc:
        return _fail(exc.to_dict(), 2)
    except FormatError as exc:
        return _fail(exc.to_dict(), 1)
    except OSError as exc:
        return _fail({"kind": "io", "detail": str(exc)}, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
