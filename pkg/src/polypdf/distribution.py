"""Validated polynomial densities on a finite support."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from . import _config
from ._numeric import bisect_quantile, integrate
from .certify import Verdict, certify_nonneg_sturm
from .exceptions import DegenerateError, DomainError, MassError, NegativityError
from .polycore import Interval, Polynomial, as_interval, definite_integral, moment_integral
from .polycore.roots import real_roots_in

__all__ = [
    "Certificate",
    "PolynomialPdf",
    "Extremum",
    "make_pdf",
    "uniform",
    "cdf",
    "quantile",
    "moments",
    "mean",
    "variance",
    "entropy",
    "kl_divergence",
    "convolve",
    "posterior_product",
    "mixture",
    "extrema",
    "sup_abs",
]


class Certificate(enum.Enum):
    CERTIFIED_NONNEGATIVE = "CertifiedNonNegative"
    CERTIFIED_BY_ROOTS = "CertifiedByRoots"
    NUMERIC_ONLY = "NumericOnly"


def sup_abs(p: Polynomial, iv) -> float:
    """``max |p|`` over the closed interval."""
    iv = as_interval(iv)
    cand = [iv.lower, iv.upper]
    if p.degree >= 2:
        cand.extend(real_roots_in(p.derivative(), iv).tolist())
    return float(np.max(np.abs(p(np.asarray(cand)))))


def _nonneg_atol(p: Polynomial, iv, mass: float) -> float:
    return _config.NONNEG_ATOL * max(abs(mass), sup_abs(p, iv))


def mass_tolerance(p: Polynomial, iv) -> float:
    """``MASS_TOL`` plus the rounding bound of the coefficient-form integral.

    The area ``sum a_i (u^(i+1) - l^(i+1)) / (i+1)`` cannot be resolved
    better than about one ulp of ``sum |a_i (u^(i+1) - l^(i+1))| / (i+1)``
    (observed errors stay below 0.7 ulp of that sum up to degree 20),
    which dominates for high-degree squares with large coefficients. Capped
    at ``MASS_TOL_MAX``: beyond that the coefficients do not define a density.
    """
    iv = as_interval(iv)
    m = np.arange(1, p.degree + 2)
    size = float(np.sum(np.abs(p.coef / m * (iv.upper ** m - iv.lower ** m))))
    return min(_config.MASS_TOL + 2 * np.finfo(float).eps * size,
               _config.MASS_TOL_MAX)


@dataclass(frozen=True, eq=False)
class PolynomialPdf:
    """A polynomial density on ``support`` with unit mass.

    Construction checks unit mass (to :func:`mass_tolerance`) and non-negativity (exact
    Sturm certificate, allowing ``NONNEG_ATOL`` relative excursion). Use
    :func:`make_pdf` to normalise an arbitrary non-negative polynomial.
    """

    poly: Polynomial
    support: Interval
    certificate: Certificate = Certificate.CERTIFIED_NONNEGATIVE

    def __post_init__(self):
        poly = self.poly if isinstance(self.poly, Polynomial) else Polynomial(self.poly)
        support = as_interval(self.support)
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "support", support)
        if poly.is_zero():
            raise MassError("zero polynomial has no mass")
        rep = certify_nonneg_sturm(poly, support, atol=_nonneg_atol(poly, support, 1.0))
        if rep.verdict is not Verdict.NON_NEGATIVE:
            raise NegativityError("density takes negative values on its support", rep)
        mass = definite_integral(poly, support)
        if abs(mass - 1.0) > mass_tolerance(poly, support):
            raise MassError(f"density integrates to {mass!r}, not 1")

    # evaluation -----------------------------------------------------------

    @property
    def degree(self) -> int:
        return self.poly.degree

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(self.support.contains(x), self.poly(x), 0.0)
        return out.item() if out.ndim == 0 else out

    __call__ = pdf

    def cdf(self, x):
        return cdf(self, x)

    def quantile(self, q):
        return quantile(self, q)

    def moment(self, k: int) -> float:
        return moments(self, k)

    def mean(self) -> float:
        return mean(self)

    def variance(self) -> float:
        return variance(self)

    def entropy(self) -> float:
        return entropy(self)

    def median(self) -> float:
        return float(quantile(self, 0.5))

    def extrema(self):
        return extrema(self)

    def __repr__(self):
        return (f"PolynomialPdf(poly={self.poly.coef.tolist()!r}, "
                f"support=({self.support.lower!r}, {self.support.upper!r}))")

    def __eq__(self, other):
        if not isinstance(other, PolynomialPdf):
            return NotImplemented
        return self.poly == other.poly and self.support == other.support


def make_pdf(p: Polynomial, iv, certificate: Certificate = Certificate.CERTIFIED_NONNEGATIVE) -> PolynomialPdf:
    """Normalise a non-negative polynomial to unit mass on ``iv``.

    Raises
    ------
    NegativityError
        If the exact certifier finds negative values (report attached).
    DegenerateError
        If the polynomial has zero mass.
    """
    iv = as_interval(iv)
    p = p if isinstance(p, Polynomial) else Polynomial(p)
    if p.is_zero():
        raise DegenerateError("zero polynomial has no mass")
    mass = definite_integral(p, iv)
    atol = _nonneg_atol(p, iv, mass) if mass > 0 else 0.0
    rep = certify_nonneg_sturm(p, iv, atol=atol)
    if rep.verdict is not Verdict.NON_NEGATIVE:
        raise NegativityError("polynomial takes negative values on the support", rep)
    if not mass > 0:
        raise DegenerateError(f"polynomial mass {mass!r} is not positive")
    if abs(mass - 1.0) <= mass_tolerance(p, iv):
        return PolynomialPdf(p, iv, certificate)  # rescaling would only add rounding
    return PolynomialPdf(p / mass, iv, certificate)


def uniform(lower: float, upper: float) -> PolynomialPdf:
    iv = Interval(lower, upper)
    return PolynomialPdf(Polynomial([1.0 / iv.width]), iv)


# ---------------------------------------------------------------------------
# distribution functions
# ---------------------------------------------------------------------------

def _cdf_raw(d: PolynomialPdf, x):
    # P(x) = x p~(x) - l p~(l), with x p~(x) the zero-constant antiderivative
    A = d.poly.antiderivative()
    return A(x) - A(d.support.lower)


def cdf(d: PolynomialPdf, x):
    """Cumulative distribution on the closed support.

    Raises
    ------
    DomainError
        If any ``x`` lies outside ``[l, u]``.
    """
    xa = np.asarray(x, dtype=float)
    if not np.all(d.support.contains(xa)):
        raise DomainError("cdf argument outside the support")
    out = np.clip(_cdf_raw(d, xa), 0.0, 1.0)
    out = np.where(xa == d.support.lower, 0.0, out)
    out = np.where(xa == d.support.upper, 1.0, out)
    return out.item() if np.ndim(out) == 0 else out


def quantile(d: PolynomialPdf, q):
    """Leftmost ``x`` with ``cdf(x) = q`` for ``0 < q < 1``."""
    qa = np.asarray(q, dtype=float)
    if np.any((qa <= 0) | (qa >= 1)) or not np.all(np.isfinite(qa)):
        raise DomainError("quantile level must lie in (0, 1)")
    iv = d.support
    out = bisect_quantile(lambda x: _cdf_raw(d, x), d.poly, iv.lower, iv.upper, qa)
    return out.reshape(qa.shape).item() if qa.ndim == 0 else out.reshape(qa.shape)


def moments(d: PolynomialPdf, k: int) -> float:
    """k-th raw moment ``int x^k p(x) dx``."""
    return moment_integral(d.poly, k, d.support)


def mean(d: PolynomialPdf) -> float:
    return moments(d, 1)


def variance(d: PolynomialPdf) -> float:
    # central form avoids cancellation for supports far from zero
    m = mean(d)
    centred = d.poly.compose(Polynomial([m, 1.0]))
    iv = Interval(d.support.lower - m, d.support.upper - m)
    return moment_integral(centred, 2, iv)


def _xlogx_points(p: Polynomial, iv: Interval):
    return real_roots_in(p, iv).tolist() if p.degree >= 1 else []


def entropy(d: PolynomialPdf) -> float:
    """Differential entropy ``-int p log p`` by adaptive quadrature."""
    clamp = _config.LOG_CLAMP
    p = d.poly

    def f(x):
        v = p(x)
        return -v * math.log(v) if v > clamp else 0.0

    iv = d.support
    return integrate(f, iv.lower, iv.upper, points=_xlogx_points(p, iv))


def kl_divergence(p: PolynomialPdf, q: PolynomialPdf) -> float:
    """``int p log(p/q)`` over the common support by adaptive quadrature.

    Zeros of ``q`` at isolated points leave only integrable logarithmic
    singularities; a non-finite quadrature result is reported as ``inf``.
    """
    if p.support != q.support:
        raise DomainError("KL divergence needs identical supports")
    clamp = _config.LOG_CLAMP
    pp, qq = p.poly, q.poly

    def f(x):
        a = pp(x)
        if a <= clamp:
            return 0.0
        return a * (math.log(a) - math.log(max(qq(x), clamp)))

    iv = p.support
    pts = _xlogx_points(pp, iv) + _xlogx_points(qq, iv)
    val = integrate(f, iv.lower, iv.upper, points=pts)
    return val if math.isfinite(val) else math.inf


# ---------------------------------------------------------------------------
# combinations
# ---------------------------------------------------------------------------

def _bivariate_conv(p: Polynomial, q: Polynomial) -> np.ndarray:
    """``H[i, j]``: coefficient of ``x^i z^j`` in ``p(x) q(z - x)``."""
    n, m = p.degree, q.degree
    H = np.zeros((n + m + 1, m + 1))
    for j, b in enumerate(q.coef):
        for k in range(j + 1):
            # b (z - x)^j = b sum_k C(j,k) z^(j-k) (-x)^k
            coef = b * comb(j, k) * (-1.0) ** k
            for i, a in enumerate(p.coef):
                H[i + k, j - k] += a * coef
    return H


def _integrate_x(H: np.ndarray, lo: Polynomial, hi: Polynomial) -> Polynomial:
    """``int_{lo(z)}^{hi(z)} sum H[i,j] x^i z^j dx`` as a polynomial in z."""
    out = Polynomial([0.0])
    zpow = [Polynomial([1.0])]
    for _ in range(H.shape[1]):
        zpow.append(zpow[-1] * Polynomial([0.0, 1.0]))
    for i in range(H.shape[0]):
        prim_hi = hi ** (i + 1)
        prim_lo = lo ** (i + 1)
        diff = (prim_hi - prim_lo) / (i + 1)
        row = Polynomial([0.0])
        for j in range(H.shape[1]):
            if H[i, j] != 0.0:
                row = row + zpow[j] * H[i, j]
        out = out + diff * row
    return out


def convolve(p: PolynomialPdf, q: PolynomialPdf):
    """Density of ``X + Y`` for independent ``X ~ p``, ``Y ~ q`` on ``(l, u)``.

    The integration limits depend on ``z``: ``max(l, z - u)`` to
    ``min(u, z - l)``, giving two polynomial pieces on ``(2l, l+u)`` and
    ``(l+u, 2u)``.
    """
    from .piecewise import PiecewisePdf

    if p.support != q.support:
        raise DomainError("convolution needs identical supports")
    l, u = p.support.lower, p.support.upper
    H = _bivariate_conv(p.poly, q.poly)
    z = Polynomial([0.0, 1.0])
    left = _integrate_x(H, Polynomial([l]), z - l)
    right = _integrate_x(H, z - u, Polynomial([u]))
    segs = [(left, Interval(2 * l, l + u)), (right, Interval(l + u, 2 * u))]
    return PiecewisePdf(segs, smoothness=0)


def posterior_product(likelihood: PolynomialPdf, prior: PolynomialPdf) -> PolynomialPdf:
    """Pointwise product renormalised; the degrees add."""
    if likelihood.support != prior.support:
        raise DomainError("posterior product needs identical supports")
    prod = likelihood.poly * prior.poly
    return make_pdf(prod, likelihood.support)


def mixture(components: Sequence[PolynomialPdf], weights: Sequence[float]) -> PolynomialPdf:
    """Coefficient-wise convex combination of densities on one support."""
    components = list(components)
    w = np.asarray(weights, dtype=float)
    if len(components) == 0 or w.shape != (len(components),):
        raise DomainError("need one weight per component")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise DomainError("mixture weights must be nonnegative and sum to 1")
    support = components[0].support
    if any(c.support != support for c in components):
        raise DomainError("mixture components need a common support")
    total = Polynomial([0.0])
    for c, wi in zip(components, w):
        total = total + c.poly * float(wi)
    return make_pdf(total, support)


@dataclass(frozen=True)
class Extremum:
    x: float
    kind: str  # "min" or "max"
    boundary: bool = False


def _classify(p: Polynomial, x: float) -> str | None:
    """Kind of a critical point from the first nonvanishing higher derivative."""
    q = p.derivative()
    for k in range(2, p.degree + 1):
        q = q.derivative()
        v = q(x)
        if abs(v) > 1e-12 * max(1.0, float(np.max(np.abs(q.coef)))):
            if k % 2 == 1:
                return None  # inflection
            return "min" if v > 0 else "max"
    return None


def extrema(d: PolynomialPdf):
    """Interior critical points and both boundary points, classified.

    Interior points are real roots of the derivative inside the support,
    classified by the sign of the second (or first nonvanishing even)
    derivative; boundary points by the slope entering the support. A
    constant density reports both endpoints as maxima.
    """
    p = d.poly
    iv = d.support
    out = []
    dp = p.derivative()
    if p.degree >= 2:
        for x in real_roots_in(dp, iv):
            kind = _classify(p, float(x))
            if kind is None:
                # fall back to a sign change of the first derivative
                h = 1e-6 * iv.width
                left, right = dp(x - h), dp(x + h)
                if left > 0 > right:
                    kind = "max"
                elif left < 0 < right:
                    kind = "min"
            if kind is not None:
                out.append(Extremum(float(x), kind))

    def edge(x, inward):
        # value just inside the support versus the boundary value
        h = 1e-7 * iv.width
        delta = p(x + inward * h) - p(x)
        s = dp(x) * inward
        if dp.is_zero() or (abs(s) <= 1e-14 and abs(delta) <= 1e-300):
            return "max"
        if s != 0:
            return "min" if s > 0 else "max"
        return "min" if delta > 0 else "max"

    out.insert(0, Extremum(iv.lower, edge(iv.lower, +1), True))
    out.append(Extremum(iv.upper, edge(iv.upper, -1), True))
    return out
