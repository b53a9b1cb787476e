"""Fitting polynomial densities to histograms and sampled densities.

All least-squares work is done in the coordinate ``t = (x - mid) / half`` on
``(-1, 1)`` and mapped back at the end, which keeps the Vandermonde systems
well conditioned.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import _config
from ._numeric import integrate
from .certify import Verdict, certify_nonneg_sturm, minimum_on
from .distribution import PolynomialPdf, make_pdf, mass_tolerance, sup_abs
from .exceptions import DomainError, IllConditionedError, NegativityError
from .polycore import Interval, Polynomial, as_interval, definite_integral

__all__ = [
    "Histogram",
    "FitMethod",
    "FitConfig",
    "ConstrainedLSResult",
    "constrained_lstsq",
    "area_weights",
    "constrained_ls_fit",
    "lagrange_sqrt_fit",
    "squared_ls_fit",
    "negativity_repair",
    "smallest_repair_shift",
    "approx_known_pdf",
    "fit",
    "PolynomialPdfRegressor",
]


@dataclass(frozen=True)
class Histogram:
    """Ordered points ``(x_i, y_i)`` with ``y_i >= 0``.

    The bin width is the mean spacing of ``x``.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape or x.size == 0:
            raise DomainError("histogram needs matching, nonempty x and y")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("histogram values must be finite")
        if np.any(np.diff(x) <= 0):
            raise DomainError("histogram x must be strictly increasing")
        if np.any(y < 0):
            raise DomainError("histogram y must be nonnegative")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def M(self) -> int:
        return self.x.size

    @property
    def dx(self) -> float:
        return float(np.mean(np.diff(self.x))) if self.M > 1 else 1.0

    def bin_support(self) -> Interval:
        """Support spanned by bins centred on ``x``."""
        h = 0.5 * self.dx
        return Interval(float(self.x[0]) - h, float(self.x[-1]) + h)

    def normalize(self) -> "Histogram":
        total = self.dx * float(np.sum(self.y))
        if total <= 0:
            raise DomainError("histogram has no mass")
        return Histogram(self.x, self.y / total)


class FitMethod(enum.Enum):
    CONSTRAINED_LS = "ConstrainedLS"
    LAGRANGE_SQRT = "LagrangeSqrt"
    SQUARED_LS = "SquaredLS"

    @classmethod
    def parse(cls, name) -> "FitMethod":
        if isinstance(name, cls):
            return name
        aliases = {"ls": cls.CONSTRAINED_LS, "lagrange": cls.LAGRANGE_SQRT,
                   "squared": cls.SQUARED_LS}
        key = str(name).strip()
        if key.lower() in aliases:
            return aliases[key.lower()]
        return cls(key)


@dataclass(frozen=True)
class FitConfig:
    degree: int
    support: Interval
    method: FitMethod = FitMethod.CONSTRAINED_LS
    repair: bool = False

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 0:
            raise DomainError("degree must be a nonnegative integer")
        object.__setattr__(self, "support", as_interval(self.support))
        object.__setattr__(self, "method", FitMethod.parse(self.method))


# ---------------------------------------------------------------------------
# constrained least squares
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstrainedLSResult:
    x: np.ndarray
    lam: float
    kkt_residual: float
    constraint_residual: float
    objective: float
    cond: float


def constrained_lstsq(A, y, w, c: float = 1.0, cond_limit: float = _config.COND_LIMIT):
    """``min ||y - A x||^2`` subject to ``w . x = c``.

    The constraint is removed by writing ``x = x0 + N z`` with ``N`` an
    orthonormal basis of ``w``'s orthogonal complement; the reduced problem
    is solved by ``lstsq``. Uniqueness needs ``A N`` to have full column
    rank, which is what the condition check tests. The multiplier follows from stationarity
    ``2 A^T (A x - y) + lam w = 0``.

    Raises
    ------
    IllConditionedError
        If ``A N`` is rank deficient or its condition number exceeds ``cond_limit``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    k = A.shape[1]
    ww = float(w @ w)
    x0 = w * (c / ww)
    # orthonormal complement of w from a full QR
    Q, _ = np.linalg.qr(np.column_stack([w, np.eye(k)]))
    N = Q[:, 1:k]
    cond = 1.0
    if k > 1:
        AN = A @ N
        sv = np.linalg.svd(AN, compute_uv=False)
        cond = float(sv[0] / sv[-1]) if AN.shape[0] >= AN.shape[1] and sv[-1] > 0 else np.inf
        if not cond < cond_limit:
            raise IllConditionedError(
                f"constrained system condition number {cond:.3g} exceeds {cond_limit:.0e}; "
                "lower the degree or remap the support to (-1, 1)")
        z = np.linalg.lstsq(AN, y - A @ x0, rcond=None)[0]
        x = x0 + N @ z
    else:
        x = x0
    g = 2.0 * A.T @ (A @ x - y)
    lam = -float(w @ g) / ww
    kkt = float(np.linalg.norm(g + lam * w))
    r = y - A @ x
    return ConstrainedLSResult(x, lam, kkt, abs(float(w @ x) - c), float(r @ r), cond)


def area_weights(n: int, iv) -> np.ndarray:
    """``w_i = (u^{i+1} - l^{i+1}) / (i + 1)`` so that ``w . a`` is the area."""
    iv = as_interval(iv)
    i = np.arange(n + 1)
    return (iv.upper ** (i + 1) - iv.lower ** (i + 1)) / (i + 1)


def _local(iv: Interval):
    mid, half = iv.midpoint, 0.5 * iv.width
    to_global = Polynomial([-mid / half, 1.0 / half])
    return mid, half, to_global


def _check_inside(x: np.ndarray, iv: Interval):
    if np.any(x < iv.lower) or np.any(x > iv.upper):
        raise DomainError("support must contain every histogram abscissa")


def constrained_ls_fit(h: Histogram, cfg: FitConfig, return_info: bool = False):
    """Unit-area least-squares polynomial through histogram points.

    Parameters
    ----------
    h : Histogram
    cfg : FitConfig
        Degree and support; ``method`` is ignored here.
    return_info : bool
        Also return the :class:`ConstrainedLSResult` of the local problem.

    Returns
    -------
    Polynomial
        Coefficients in the original variable; their area over the support
        is one.
    """
    n, iv = cfg.degree, cfg.support
    _check_inside(h.x, iv)
    if h.M < n + 1:
        raise IllConditionedError(f"need at least {n + 1} points for degree {n}, got {h.M}")
    mid, half, to_global = _local(iv)
    t = (h.x - mid) / half
    T = np.vander(t, n + 1, increasing=True)
    sv = np.linalg.svd(T, compute_uv=False)
    if not sv[0] / max(sv[-1], np.finfo(float).tiny) < _config.COND_LIMIT:
        raise IllConditionedError(
            f"design matrix is rank deficient for degree {n}; lower the degree")
    j = np.arange(n + 1)
    w_loc = half * (1.0 - (-1.0) ** (j + 1)) / (j + 1)
    res = constrained_lstsq(T, h.y, w_loc, 1.0)
    p = Polynomial(res.x).compose(to_global)
    return (p, res) if return_info else p


def _lagrange_basis(x: np.ndarray, i: int) -> Polynomial:
    out = Polynomial([1.0])
    for j, xj in enumerate(x):
        if j != i:
            out = out * Polynomial([-xj / (x[i] - xj), 1.0 / (x[i] - xj)])
    return out


def lagrange_sqrt_fit(h: Histogram, support=None, return_area: bool = False):
    """Square of the Lagrange interpolant through ``(x_i, sqrt(y_i))``, unit area.

    The area is assembled from the Gram integrals ``s_ij`` of the basis,
    ``Z = sum_ij sqrt(y_i y_j) s_ij``. The result has degree ``2(M - 1)`` and
    passes through ``(x_i, y_i / Z)``.
    """
    iv = h.bin_support() if support is None else as_interval(support)
    _check_inside(h.x, iv)
    if h.M < 2:
        raise DomainError("need at least two points")
    if np.any(np.diff(h.x) == 0):
        raise DomainError("duplicate abscissae")
    mid, half, to_global = _local(iv)
    t = (h.x - mid) / half
    basis = [_lagrange_basis(t, i) for i in range(h.M)]
    r = np.sqrt(h.y)
    S = np.empty((h.M, h.M))
    for i in range(h.M):
        for j in range(i, h.M):
            S[i, j] = S[j, i] = half * definite_integral(basis[i] * basis[j], (-1.0, 1.0))
    Z = float(r @ S @ r)
    if not Z > 0:
        raise DomainError("all histogram heights are zero")
    s = Polynomial([0.0])
    for ri, b in zip(r, basis):
        s = s + b * ri
    s = s.compose(to_global)
    sq = s * s
    if mass_tolerance(sq / Z, iv) >= _config.MASS_TOL_MAX:
        raise IllConditionedError(
            f"interpolant through {h.M} points is too ill-conditioned in coefficient form; "
            "use fewer points or a least-squares method")
    # Z from the Gram sums can be off by a few ulps of a large matrix; settle
    # the mass on the stored coefficients before guarding the square
    p = _guard_square(sq / definite_integral(sq, iv), s, Z, iv)
    return (p, Z) if return_area else p


def _guard_square(p: Polynomial, s: Polynomial, Z: float, iv: Interval) -> Polynomial:
    """Lift a squared polynomial by its coefficient rounding bound if needed.

    At a double root of ``s^2`` the stored coefficients may dip below zero by
    about ``eps * (sum |s_i| R^i)^2``; the shift restores a certifiable
    square at that cost and the area is renormalised.
    """
    atol = _config.NONNEG_ATOL * max(1.0, sup_abs(p, iv))
    if certify_nonneg_sturm(p, iv, atol=atol).verdict is Verdict.NON_NEGATIVE:
        return p
    R = max(1.0, abs(iv.lower), abs(iv.upper))
    size = float(np.sum(np.abs(s.coef) * R ** np.arange(s.coef.size)))
    shift = 2.0 * (p.degree + 1) * np.finfo(float).eps * size * size / Z
    for _ in range(60):
        q = (p + shift) / (1.0 + shift * iv.width)
        if certify_nonneg_sturm(q, iv, atol=atol).verdict is Verdict.NON_NEGATIVE:
            return q
        shift *= 2.0
    return q


def squared_ls_fit(h: Histogram, cfg: FitConfig) -> Polynomial:
    """Least-squares degree-``n`` fit of ``sqrt(y)``, squared and normalised."""
    iv = cfg.support
    _check_inside(h.x, iv)
    mid, half, to_global = _local(iv)
    t = (h.x - mid) / half
    T = np.vander(t, cfg.degree + 1, increasing=True)
    sv = np.linalg.svd(T, compute_uv=False)
    if h.M < cfg.degree + 1 or not sv[0] / sv[-1] < _config.COND_LIMIT:
        raise IllConditionedError("square-root design matrix is rank deficient; lower the degree")
    b = np.linalg.lstsq(T, np.sqrt(h.y), rcond=None)[0]
    s = Polynomial(b)
    s = s.compose(to_global)
    area = definite_integral(s * s, iv)
    return _guard_square(s * s / area, s, area, iv)


# ---------------------------------------------------------------------------
# negativity repair
# ---------------------------------------------------------------------------

def negativity_repair(p: Polynomial, h_or_dx, d: float, support) -> Polynomial:
    """Lift ``p`` by ``d / dx`` and rescale to keep the area.

    ``p -> (p + d/dx) / (1 + d (u - l) / dx)``, which is the shift applied to
    the histogram heights ``y -> (y + d/dx) / (1 + M d)`` whenever the bins
    cover the support (``M dx = u - l``).
    """
    if not d > 0:
        raise DomainError("repair shift d must be positive")
    iv = as_interval(support)
    dx = h_or_dx.dx if isinstance(h_or_dx, Histogram) else float(h_or_dx)
    area = definite_integral(p, iv)
    if not area > 0:
        raise DomainError("polynomial to repair must have positive area")
    c = d / dx
    return (p + c) * (area / (area + c * iv.width))


def smallest_repair_shift(p: Polynomial, dx: float, support, margin: float = 1e-9) -> float:
    """Smallest ``d`` making the repaired polynomial non-negative.

    The repaired minimum ``(min p + d/dx) / scale`` changes sign exactly at
    ``d = -min(p) dx``; a relative ``margin`` is added for rounding.
    """
    _, pmin = minimum_on(p, support)
    if pmin >= 0:
        return 0.0
    return -pmin * dx * (1.0 + margin)


# ---------------------------------------------------------------------------
# known densities and dispatch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ApproxResult:
    pdf: PolynomialPdf
    l2_error: float
    repair_shift: float = 0.0


def _certify_or_repair(p: Polynomial, iv: Interval, dx: float, repair: bool):
    rep = certify_nonneg_sturm(p, iv, atol=_config.NONNEG_ATOL * max(1.0, sup_abs(p, iv)))
    if rep.verdict is Verdict.NON_NEGATIVE:
        return make_pdf(p, iv), 0.0
    if not repair:
        raise NegativityError("fitted polynomial takes negative values; enable repair", rep)
    d = smallest_repair_shift(p, dx, iv)
    return make_pdf(negativity_repair(p, dx, d, iv), iv), d


def approx_known_pdf(f: Callable[[float], float], support, n: int, samples: int | None = None,
                     repair: bool = False) -> ApproxResult:
    """Polynomial density fitted to samples of a known density.

    ``f`` is sampled at ``samples`` (default ``8 (n + 1)``) equispaced points
    including both ends, fitted by constrained least squares and certified.
    The reported error is ``int (f - p)^2``.
    """
    iv = as_interval(support)
    m = 8 * (n + 1) if samples is None else int(samples)
    x = np.linspace(iv.lower, iv.upper, m)
    y = np.array([float(f(v)) for v in x])
    if np.any(y < 0):
        raise DomainError("density samples must be nonnegative")
    h = Histogram(x, y)
    p = constrained_ls_fit(h, FitConfig(n, iv))
    pdf, d = _certify_or_repair(p, iv, h.dx, repair)
    err = integrate(lambda v: (float(f(v)) - pdf.poly(v)) ** 2, iv.lower, iv.upper)
    return ApproxResult(pdf, err, d)


def fit(h: Histogram, cfg: FitConfig) -> PolynomialPdf:
    """Fit with the configured method and return a validated density."""
    if cfg.method is FitMethod.CONSTRAINED_LS:
        p = constrained_ls_fit(h, cfg)
    elif cfg.method is FitMethod.LAGRANGE_SQRT:
        p = lagrange_sqrt_fit(h, cfg.support)
    else:
        p = squared_ls_fit(h, cfg)
    return _certify_or_repair(p, cfg.support, h.dx, cfg.repair)[0]


class PolynomialPdfRegressor(RegressorMixin, BaseEstimator):
    """Scikit-learn style wrapper fitting a density to ``(x, y)`` histogram data.

    Parameters
    ----------
    degree : int
    support : tuple of float, optional
        Defaults to the bin support of the training abscissae.
    method : {'ls', 'lagrange', 'squared'}
    repair : bool
        Lift a negative constrained-LS fit instead of failing.
    """

    def __init__(self, degree=2, support=None, method="ls", repair=False):
        self.degree = degree
        self.support = support
        self.method = method
        self.repair = repair

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=2)
        if X.shape[1] != 1:
            raise ValueError("expected a single feature column")
        order = np.argsort(X[:, 0])
        h = Histogram(X[order, 0], y[order])
        support = h.bin_support() if self.support is None else as_interval(self.support)
        self.pdf_ = fit(h, FitConfig(self.degree, support, self.method, self.repair))
        self.coef_ = self.pdf_.poly.coef.copy()
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "pdf_")
        X = check_array(X)
        return np.asarray(self.pdf_.pdf(X[:, 0]), dtype=float)
