"""Estimating polynomial density coefficients from observations.

Coefficients are ascending powers of the observation variable. Every
constrained estimator enforces unit area ``w . a = 1`` with
``w_i = (u^{i+1} - l^{i+1}) / (i + 1)``; none of them forces the result to
be non-negative, so reports carry a certification verdict.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import _config
from .certify import Verdict, certify_nonneg_sturm
from .distribution import sup_abs
from .exceptions import BoundUnavailableError, DegenerateError, DomainError, ConvergenceError
from .fitting import area_weights, constrained_lstsq
from .polycore import FactoredPolynomial, Interval, Polynomial, as_interval, definite_integral

__all__ = [
    "SampleSet",
    "EstimateReport",
    "log_likelihood",
    "score",
    "ml_centroid",
    "ml_pairwise",
    "method_of_moments",
    "sample_moments",
    "ml_numeric",
    "fisher_information",
    "cramer_rao",
    "PolynomialDensityEstimator",
]


@dataclass(frozen=True)
class SampleSet:
    """Observations inside a declared support."""

    observations: np.ndarray
    support: Interval

    def __post_init__(self):
        x = np.asarray(self.observations, dtype=float).ravel()
        iv = as_interval(self.support)
        if x.size == 0:
            raise DomainError("empty sample set")
        if not np.all(np.isfinite(x)) or np.any(x < iv.lower) or np.any(x > iv.upper):
            raise DomainError("observations must lie inside the support")
        x.setflags(write=False)
        object.__setattr__(self, "observations", x)
        object.__setattr__(self, "support", iv)

    @property
    def M(self) -> int:
        return self.observations.size

    def lifted(self, n: int) -> np.ndarray:
        """Rows ``(x_m^0, ..., x_m^n)``."""
        return np.vander(self.observations, n + 1, increasing=True)


@dataclass
class EstimateReport:
    coefficients: Polynomial
    method: str
    log_likelihood: float
    constraint_residual: float
    support: Interval
    verdict: Verdict | None = None
    skipped_pairs: int = 0
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        from .io import poly_to_dict
        out = {
            "method": self.method,
            "coefficients": poly_to_dict(self.coefficients),
            "support": {"lower": self.support.lower, "upper": self.support.upper},
            "log_likelihood": self.log_likelihood if math.isfinite(self.log_likelihood) else None,
            "constraint_residual": self.constraint_residual,
            "verdict": None if self.verdict is None else self.verdict.value,
            "skipped_pairs": self.skipped_pairs,
        }
        return out


def _as_poly(a) -> Polynomial:
    return a if isinstance(a, Polynomial) else Polynomial(a)


def log_likelihood(a, s: SampleSet) -> float:
    """``sum_m log a(x_m)``; ``-inf`` if ``a`` is not positive at every sample."""
    v = _as_poly(a)(s.observations)
    v = np.atleast_1d(v)
    if np.any(~(v > 0)):
        return -math.inf
    return float(np.sum(np.log(v)))


def score(a, s: SampleSet, n: int | None = None) -> np.ndarray:
    """Gradient ``sum_m x_m^i / a(x_m)`` of the log-likelihood in the coefficients.

    Returns NaNs when ``a`` is not positive at every sample.
    """
    a = _as_poly(a)
    n = a.degree if n is None else n
    X = s.lifted(n)
    v = np.atleast_1d(a(s.observations))
    if np.any(~(v > 0)):
        return np.full(n + 1, np.nan)
    return np.sum(X / v[:, None], axis=0)


def _report(p: Polynomial, s: SampleSet, method: str, **kw) -> EstimateReport:
    iv = s.support
    resid = abs(definite_integral(p, iv) - 1.0)
    sup = sup_abs(p, iv) if not p.is_zero() else 1.0
    verdict = certify_nonneg_sturm(p, iv, atol=_config.NONNEG_ATOL * max(1.0, sup)).verdict \
        if not p.is_zero() else Verdict.HAS_NEGATIVE
    return EstimateReport(p, method, log_likelihood(p, s), resid, iv, verdict=verdict, **kw)


def ml_centroid(s: SampleSet, n: int) -> EstimateReport:
    """Centroid of the normalised lifted rows, rescaled to unit area.

    Aligning the coefficient vector with every lifted observation maximises
    the product of cosines; the centroid is a cheap stand-in for that
    direction. Heuristic only.
    """
    X = s.lifted(n)
    c = np.mean(X / np.linalg.norm(X, axis=1)[:, None], axis=0)
    w = area_weights(n, s.support)
    area = float(w @ c)
    if abs(area) <= 1e-14 * float(np.abs(w) @ np.abs(c)):
        raise DegenerateError("centroid has zero area; cannot rescale")
    return _report(Polynomial(c / area), s, "centroid")


def ml_pairwise(s: SampleSet, n: int, ridge: float = 1e-10) -> EstimateReport:
    """Average of per-pair constrained maximisers of ``a^T X_12 a``.

    ``X_12 = x_1 x_2^T`` has rank one, so its Moore-Penrose pseudo-inverse
    stands in for the inverse; when ``w^T X^+ w`` vanishes a ridge
    ``X + ridge I`` is tried, and a pair that still fails is skipped.
    """
    if s.M < 2 or s.M % 2:
        raise DomainError("pairwise estimation needs an even number of observations")
    X = s.lifted(n)
    w = area_weights(n, s.support)
    total = np.zeros(n + 1)
    used = skipped = 0
    for i in range(0, s.M, 2):
        P = np.outer(X[i], X[i + 1])
        scale = float(np.linalg.norm(P))
        est = None
        for inv in (lambda: np.linalg.pinv(P),
                    lambda: np.linalg.inv(P + ridge * max(scale, 1.0) * np.eye(n + 1))):
            try:
                v = inv() @ w
            except np.linalg.LinAlgError:
                continue
            d = float(w @ v)
            if abs(d) > 1e-12 * float(np.abs(w) @ np.abs(v)):
                est = v / d
                break
        if est is None:
            skipped += 1
            continue
        total += est
        used += 1
    if used == 0:
        raise DegenerateError("every observation pair was numerically null")
    if skipped:
        warnings.warn(f"{skipped} observation pairs skipped", RuntimeWarning, stacklevel=2)
    return _report(Polynomial(total / used), s, "pairwise", skipped_pairs=skipped)


def sample_moments(x, K: int) -> np.ndarray:
    """Empirical raw moments ``M_1..M_K``."""
    x = np.asarray(x, dtype=float)
    return np.array([np.mean(x ** k) for k in range(1, K + 1)])


def method_of_moments(moments: Sequence[float], n: int, support,
                      samples: SampleSet | None = None) -> EstimateReport:
    """Constrained least-squares match of raw moments ``M_1..M_K``.

    The moments are first converted to the coordinate on ``(-1, 1)``, where
    ``B_ki = int t^{i+k}`` is far better conditioned, and the solution is
    mapped back.
    """
    iv = as_interval(support)
    Mk = np.asarray(moments, dtype=float).ravel()
    K = Mk.size
    if K < n:
        raise DomainError(f"need at least {n} moments for degree {n}, got {K}")
    mid, half = iv.midpoint, 0.5 * iv.width
    full = np.concatenate([[1.0], Mk])
    # E[t^k] with t = (x - mid) / half
    Mt = np.array([sum(comb(k, j) * (-mid) ** (k - j) * full[j] for j in range(k + 1)) / half ** k
                   for k in range(1, K + 1)])
    i = np.arange(n + 1)
    k = np.arange(1, K + 1)[:, None]
    e = i[None, :] + k
    B = half * (1.0 - (-1.0) ** (e + 1)) / (e + 1)
    w = half * (1.0 - (-1.0) ** (i + 1)) / (i + 1)
    res = constrained_lstsq(B, Mt, w, 1.0)
    p = Polynomial(res.x).compose(Polynomial([-mid / half, 1.0 / half]))
    if samples is None:
        resid = abs(definite_integral(p, iv) - 1.0)
        return EstimateReport(p, "mom", math.nan, resid, iv,
                              extras={"kkt_residual": res.kkt_residual})
    rep = _report(p, samples, "mom")
    rep.extras["kkt_residual"] = res.kkt_residual
    return rep


def ml_numeric(s: SampleSet, n: int, grid: int = 201, max_iter: int = 200,
               start: Polynomial | None = None) -> EstimateReport:
    """Reference maximum likelihood under unit area and positivity on a grid.

    Newton ascent on the constraint manifold with a logarithmic barrier for
    ``a(g_k) > 0`` at ``grid`` support points; the barrier weight is driven
    to zero. Starts from the better of the centroid estimate (or ``start``)
    and the uniform density, blended toward uniform until strictly positive.
    Never returns a lower likelihood than its start.
    """
    iv = s.support
    mid, half = iv.midpoint, 0.5 * iv.width
    to_global = Polynomial([-mid / half, 1.0 / half])
    T = np.vander((s.observations - mid) / half, n + 1, increasing=True)
    G = np.vander(np.linspace(-1.0, 1.0, grid), n + 1, increasing=True)
    j = np.arange(n + 1)
    w = half * (1.0 - (-1.0) ** (j + 1)) / (j + 1)
    uni = np.zeros(n + 1)
    uni[0] = 1.0 / iv.width

    def to_local(p: Polynomial) -> np.ndarray:
        b = p.compose(Polynomial([mid, half])).coef
        out = np.zeros(n + 1)
        out[:min(b.size, n + 1)] = b[:n + 1]
        return out

    cands = [uni]
    try:
        c0 = start if start is not None else ml_centroid(s, n).coefficients
        cands.insert(0, to_local(c0))
    except DegenerateError:
        pass

    def ll(b):
        v = T @ b
        return float(np.sum(np.log(v))) if np.all(v > 0) else -math.inf

    best_start = max(cands, key=ll)
    b = best_start
    for theta in (0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0):
        trial = (1 - theta) * best_start + theta * uni
        if np.all(G @ trial > 0) and np.all(T @ trial > 0):
            b = trial
            break
    Q, _ = np.linalg.qr(np.column_stack([w, np.eye(n + 1)]))
    N = Q[:, 1:]
    mu = 1.0
    it = 0
    while mu > 1e-12 and it < max_iter:
        scale = mu * s.M / grid

        def f(bb):
            v, g = T @ bb, G @ bb
            if np.any(v <= 0) or np.any(g <= 0):
                return -math.inf
            return float(np.sum(np.log(v)) + scale * np.sum(np.log(g)))

        for _ in range(50):
            it += 1
            v, g = T @ b, G @ b
            grad = T.T @ (1.0 / v) + scale * (G.T @ (1.0 / g))
            H = -(T.T * (1.0 / v ** 2)) @ T - scale * (G.T * (1.0 / g ** 2)) @ G
            gr = N.T @ grad
            Hr = N.T @ H @ N
            try:
                step = -np.linalg.solve(Hr, gr)
            except np.linalg.LinAlgError:
                step = gr
            dec = float(gr @ step)
            if dec < 1e-14 * max(1.0, abs(f(b))):
                break
            f0, t = f(b), 1.0
            while t > 1e-12:
                cand = b + t * (N @ step)
                if f(cand) >= f0 + 1e-4 * t * float(gr @ step):
                    b = cand
                    break
                t *= 0.5
            else:
                break
        mu *= 0.1
    if ll(b) < ll(best_start):
        b = best_start
    p = Polynomial(b).compose(to_global)
    return _report(p, s, "ml")


def fisher_information(f: FactoredPolynomial, support) -> np.ndarray:
    """Fisher matrix in the root parameters by the reduced integral.

    ``J_ij = int a_n prod_{k != i, j} (x - r_k) dx``; for ``i == j`` only the
    factor of ``r_i`` is removed. Each reduced product is expanded to
    coefficient form and integrated exactly.
    """
    iv = as_interval(support)
    r = np.asarray(f.roots)
    if np.any(np.abs(r.imag) > 1e-12):
        raise DomainError("Fisher information needs real root parameters")
    r = r.real
    n = r.size
    J = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            keep = [k for k in range(n) if k != i and k != j]
            p = Polynomial([f.leading])
            for k in keep:
                p = p * Polynomial([-r[k], 1.0])
            J[i, j] = J[j, i] = definite_integral(p, iv)
    return J


def cramer_rao(J) -> np.ndarray:
    """Inverse of a symmetric positive definite information matrix."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    if J.shape[0] != J.shape[1] or not np.allclose(J, J.T, rtol=0, atol=1e-12 * max(1.0, np.abs(J).max())):
        raise BoundUnavailableError("information matrix must be square and symmetric")
    try:
        c = cho_factor(J)
    except LinAlgError as exc:
        raise BoundUnavailableError("information matrix is not positive definite") from exc
    return cho_solve(c, np.eye(J.shape[0]))


class PolynomialDensityEstimator(DensityMixin, BaseEstimator):
    """Scikit-learn style density estimator with polynomial densities.

    Parameters
    ----------
    degree : int
    support : tuple of float
    method : {'mom', 'ml', 'centroid', 'pairwise'}
    n_moments : int, optional
        Moments matched by ``'mom'``; defaults to ``degree``.
    """

    def __init__(self, degree=2, support=(0.0, 1.0), method="mom", n_moments=None):
        self.degree = degree
        self.support = support
        self.method = method
        self.n_moments = n_moments

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=False)
        x = np.asarray(X, dtype=float).ravel()
        s = SampleSet(x, self.support)
        n = int(self.degree)
        if self.method == "mom":
            K = n if self.n_moments is None else int(self.n_moments)
            rep = method_of_moments(sample_moments(x, max(K, 1)), n, s.support, samples=s)
        elif self.method == "ml":
            rep = ml_numeric(s, n)
        elif self.method == "centroid":
            rep = ml_centroid(s, n)
        elif self.method == "pairwise":
            if s.M % 2:
                s = SampleSet(x[:-1], s.support)  # last observation has no partner
            rep = ml_pairwise(s, n)
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self.report_ = rep
        self.coef_ = rep.coefficients.coef.copy()
        self.n_features_in_ = 1
        return self

    def score_samples(self, X):
        check_is_fitted(self, "report_")
        x = np.asarray(check_array(X, ensure_2d=False), dtype=float).ravel()
        v = np.atleast_1d(self.report_.coefficients(x))
        iv = as_interval(self.support)
        inside = (x >= iv.lower) & (x <= iv.upper) & (v > 0)
        with np.errstate(divide="ignore"):
            return np.where(inside, np.log(np.where(inside, v, 1.0)), -np.inf)

    def score(self, X, y=None):
        return float(np.sum(self.score_samples(X)))
