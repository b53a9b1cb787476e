"""Piecewise polynomial densities through alternating control points.

Each segment is a monotone polynomial between a labelled minimum and a
labelled maximum. Segments are stored with a sign ``w = +1`` when rising and
``w = -1`` when falling, so that the signed polynomial ``q = w p`` is
increasing and the smoothness conditions at a knot read
``X_C(x) (a_prev + a_next) = 0``.

Each segment's minimum-norm quadratic program is solved in segment-local
coordinates ``t = (x - mid) / half`` on ``(-1, 1)``; the solution is then
expressed in the global variable.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from math import factorial
from typing import Sequence

import numpy as np

from . import _config
from ._numeric import bisect_quantile, integrate
from .certify import Verdict, certify_nonneg_sturm
from .exceptions import (ConvergenceError, DegenerateError, DomainError,
                         InfeasibleError)
from .polycore import Interval, Polynomial, as_interval, definite_integral, moment_integral
from .polycore.roots import real_roots_in

__all__ = [
    "ControlPoints",
    "PiecewisePdf",
    "nnls",
    "least_distance",
    "min_norm_qp",
    "smoothness_matrix",
    "solve_first_segment",
    "solve_next_segment",
    "build",
]


# ---------------------------------------------------------------------------
# small dense solvers
# ---------------------------------------------------------------------------

def nnls(A, b, max_iter: int | None = None):
    """Lawson-Hanson active-set solution of ``min ||A x - b||`` with ``x >= 0``.

    Returns
    -------
    x : ndarray
    rnorm : float
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    max_iter = 3 * n if max_iter is None else max_iter
    tol = 10 * np.finfo(float).eps * np.linalg.norm(A, 1) * max(m, n)
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ (b - A @ x)
    it = 0
    while (~passive).any() and np.max(np.where(passive, -np.inf, w)) > tol:
        if it >= max_iter:
            raise ConvergenceError("NNLS iteration cap reached", best=x)
        j = int(np.argmax(np.where(passive, -np.inf, w)))
        passive[j] = True
        while True:
            it += 1
            s = np.zeros(n)
            s[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
            if np.all(s[passive] > tol):
                break
            bad = passive & (s <= tol)
            alpha = np.min(x[bad] / (x[bad] - s[bad]))
            x = x + alpha * (s - x)
            passive &= x > tol
            x[~passive] = 0.0
            if not passive.any():
                s = np.zeros(n)
                break
        x = s
        w = A.T @ (b - A @ x)
    return x, float(np.linalg.norm(A @ x - b))


def least_distance(G, h, max_iter: int | None = None):
    """Minimum-norm ``z`` with ``G z >= h`` via the NNLS dual.

    Raises
    ------
    InfeasibleError
        If the constraint set is empty.
    """
    G = np.asarray(G, dtype=float)
    h = np.asarray(h, dtype=float)
    p, m = G.shape
    if p == 0 or np.all(h <= 0):
        return np.zeros(m)
    E = np.vstack([G.T, h[None, :]])
    f = np.zeros(m + 1)
    f[-1] = 1.0
    u, _ = nnls(E, f, max_iter=max_iter)
    r = E @ u - f
    if abs(r[-1]) <= 1e-12:
        raise InfeasibleError("inequality constraints are incompatible",
                              violated=np.nonzero(h > 0)[0].tolist())
    return -r[:m] / r[-1]


@dataclass(frozen=True)
class QPResult:
    x: np.ndarray
    eq_residual: float
    min_slack: float
    active: tuple


def min_norm_qp(E, f, G, h, max_iter: int | None = None) -> QPResult:
    """``min <a, a>`` subject to ``E a = f`` and ``G a >= h``.

    The equalities are removed with a null-space basis from the SVD of ``E``
    and the remaining least-distance program is solved through NNLS.
    """
    E = np.atleast_2d(np.asarray(E, dtype=float))
    f = np.asarray(f, dtype=float)
    G = np.atleast_2d(np.asarray(G, dtype=float))
    h = np.asarray(h, dtype=float)
    m = E.shape[1]
    U, s, Vt = np.linalg.svd(E)
    rank = int(np.sum(s > s[0] * 1e-12)) if s.size else 0
    a0 = Vt[:rank].T @ ((U[:, :rank].T @ f) / s[:rank])
    eq_res = float(np.max(np.abs(E @ a0 - f))) if E.size else 0.0
    if eq_res > 1e-8 * max(1.0, float(np.max(np.abs(f)))):
        raise InfeasibleError("equality constraints are inconsistent", violated=["equality"])
    N = Vt[rank:].T
    if N.shape[1] == 0:
        a = a0
    else:
        try:
            z = least_distance(G @ N, h - G @ a0, max_iter=max_iter)
        except ConvergenceError as exc:
            slack = G @ a0 - h
            raise InfeasibleError("active-set iteration cap reached",
                                  violated=np.nonzero(slack < 0)[0].tolist()) from exc
        a = a0 + N @ z
    slack = G @ a - h
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if slack.size and np.min(slack) < -1e-9 * scale:
        raise InfeasibleError("inequality constraints cannot be met",
                              violated=np.nonzero(slack < -1e-9 * scale)[0].tolist())
    active = tuple(np.nonzero(np.abs(slack) <= 1e-9 * scale)[0].tolist())
    return QPResult(a, float(np.max(np.abs(E @ a - f))) if E.size else 0.0,
                    float(np.min(slack)) if slack.size else math.inf, active)


# ---------------------------------------------------------------------------
# control points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ControlPoints:
    """Points ``(x_i, y_i)`` labelled as alternating ``min``/``max``."""

    x: tuple
    y: tuple
    labels: tuple

    def __init__(self, x, y, labels=None):
        x = tuple(float(v) for v in x)
        y = tuple(float(v) for v in y)
        if len(x) != len(y) or len(x) < 2:
            raise DomainError("need at least two control points with matching x and y")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise DomainError("control point x must be strictly increasing")
        if any(not math.isfinite(v) for v in x + y) or min(y) < 0:
            raise DomainError("control point y must be finite and nonnegative")
        if labels is None:
            first = "min" if y[1] > y[0] else "max"
            labels = [first if i % 2 == 0 else ("max" if first == "min" else "min")
                      for i in range(len(x))]
        labels = tuple(str(v).strip().lower() for v in labels)
        if len(labels) != len(x) or any(v not in ("min", "max") for v in labels):
            raise DomainError("labels must be 'min' or 'max', one per point")
        if any(a == b for a, b in zip(labels, labels[1:])):
            raise DomainError("extremum labels must alternate")
        for i in range(len(x) - 1):
            rising = labels[i] == "min"
            if (y[i + 1] > y[i]) != rising or y[i + 1] == y[i]:
                raise DegenerateError(
                    f"segment {i} must be strictly {'increasing' if rising else 'decreasing'}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "labels", labels)

    @property
    def n_segments(self) -> int:
        return len(self.x) - 1

    @property
    def support(self) -> Interval:
        return Interval(self.x[0], self.x[-1])

    def sign(self, i: int) -> int:
        """``+1`` for a segment rising from a minimum, ``-1`` otherwise."""
        return 1 if self.labels[i] == "min" else -1


# ---------------------------------------------------------------------------
# segment programs
# ---------------------------------------------------------------------------

def smoothness_matrix(x0: float, n: int, C: int) -> np.ndarray:
    """Derivative-matching matrix in descending power order.

    Row ``k`` evaluates the k-th derivative at ``x0`` when applied to
    ``[a_n, ..., a_1, a_0]``.
    """
    if C >= n:
        raise InfeasibleError(f"smoothness order {C} needs degree above it, got {n}")
    X = np.zeros((C + 1, n + 1))
    for k in range(C + 1):
        for col in range(n + 1):
            i = n - col
            if i >= k:
                X[k, col] = factorial(i) / factorial(i - k) * x0 ** (i - k)
    return X


def _drow(n: int, k: int, t: float) -> np.ndarray:
    """Row giving the k-th t-derivative at ``t`` of ascending coefficients."""
    r = np.zeros(n + 1)
    for i in range(k, n + 1):
        r[i] = factorial(i) / factorial(i - k) * t ** (i - k)
    return r


def _local_map(lo: float, hi: float) -> Polynomial:
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return Polynomial([-mid / half, 1.0 / half])


def _check_params(n: int, C: int, K: int, margin: int = 2):
    # a segment carries up to C + 2 independent equalities
    if C < 0:
        raise DomainError("smoothness order must be nonnegative")
    if n < C + margin:
        raise InfeasibleError(f"degree {n} too small for smoothness {C}; need n >= C + {margin}")
    if K < 2:
        raise DomainError("need at least two samples per segment")


def _prev_targets(prev: Polynomial, x: float, C: int):
    """Derivatives ``0..C`` of the previous signed segment at the knot."""
    return [float(prev.derivative(k)(x)) if k else float(prev(x)) for k in range(C + 1)]


def _segment_program(cp: ControlPoints, i: int, n: int, C: int, K: int, targets):
    lo, hi = cp.x[i], cp.x[i + 1]
    half = 0.5 * (hi - lo)
    w = cp.sign(i)
    E, f = [], []
    # interpolation of both control points (signed)
    E.append(w * _drow(n, 0, -1.0)); f.append(cp.y[i])
    E.append(w * _drow(n, 0, 1.0)); f.append(cp.y[i + 1])
    if C >= 1:
        # labelled extrema are stationary points
        if targets is None:
            E.append(_drow(n, 1, -1.0)); f.append(0.0)
        E.append(_drow(n, 1, 1.0)); f.append(0.0)
    if targets is not None:
        # X_C(x_i) (a_prev + a_i) = 0
        for k in range(C + 1):
            E.append(_drow(n, k, -1.0) / half ** k); f.append(-targets[k])
    delta = 1e-6 * max(cp.y)
    t = np.linspace(-1.0, 1.0, K)[1:-1]
    G, h = [], []
    for tk in t:
        G.append(w * _drow(n, 0, tk)); h.append(delta)  # density positivity
        G.append(_drow(n, 1, tk)); h.append(delta * half)  # q increasing
    G = np.array(G).reshape(-1, n + 1)
    h = np.array(h)
    res = min_norm_qp(np.array(E), np.array(f), G, h, max_iter=10 * (n + 1))
    return Polynomial(res.x), res


def solve_first_segment(cp: ControlPoints, n: int, C: int = _config.PIECEWISE_DEFAULT_C,
                        K: int = _config.PIECEWISE_DEFAULT_K) -> Polynomial:
    """Signed polynomial ``q_1 = w_1 p`` of the first segment.

    Minimum coefficient norm (in segment-local coordinates) subject to
    interpolating both control points, monotonicity in the labelled
    direction and positivity at the interior samples.
    """
    _check_params(n, C, K)
    b, _ = _segment_program(cp, 0, n, C, K, None)
    return b.compose(_local_map(cp.x[0], cp.x[1]))


def solve_next_segment(prev: Polynomial, i: int, cp: ControlPoints, n: int,
                       C: int = _config.PIECEWISE_DEFAULT_C,
                       K: int = _config.PIECEWISE_DEFAULT_K) -> Polynomial:
    """Signed polynomial of segment ``i`` (0-based) continuing ``prev``.

    Adds ``X_C(x_i)(a_prev + a_i) = 0`` to the first-segment program, where
    ``x_i`` is the left knot of segment ``i``.
    """
    _check_params(n, C, K)
    if not 1 <= i < cp.n_segments:
        raise DomainError(f"segment index {i} out of range")
    b, _ = _segment_program(cp, i, n, C, K, _prev_targets(prev, cp.x[i], C))
    return b.compose(_local_map(cp.x[i], cp.x[i + 1]))


# ---------------------------------------------------------------------------
# the density
# ---------------------------------------------------------------------------

class PiecewisePdf:
    """Density made of polynomial segments tiling a finite support.

    Segments are evaluated in local coordinates ``t = (x - mid) / half`` so
    that high-degree pieces far from the origin keep full precision; the
    global coefficients are available through :attr:`segments`.

    Parameters
    ----------
    segments : sequence of (Polynomial, Interval)
        Contiguous, ordered pieces in the global variable.
    smoothness : int
        Number of derivatives matched at interior knots.
    signs : sequence of int, optional
        Monotonicity sign of each segment when built from control points.
    control_points : ControlPoints, optional
    """

    def __init__(self, segments, smoothness: int = 0, signs=None, control_points=None,
                 *, local: bool = False):
        segs = []
        for poly, iv in segments:
            poly = poly if isinstance(poly, Polynomial) else Polynomial(poly)
            segs.append((poly, as_interval(iv)))
        if not segs:
            raise DomainError("need at least one segment")
        for (_, a), (_, b) in zip(segs, segs[1:]):
            if a.upper != b.lower:
                raise DomainError("segments must tile the support without gaps or overlap")
        if local:
            self._local = tuple(p for p, _ in segs)
        else:
            self._local = tuple(p.compose(Polynomial([iv.midpoint, 0.5 * iv.width]))
                                for p, iv in segs)
        self.intervals = tuple(iv for _, iv in segs)
        self.smoothness = int(smoothness)
        self.signs = None if signs is None else tuple(int(s) for s in signs)
        self.control_points = control_points
        self.knots = np.array([self.intervals[0].lower] + [iv.upper for iv in self.intervals])
        masses = [0.5 * iv.width * definite_integral(b, (-1.0, 1.0))
                  for b, iv in zip(self._local, self.intervals)]
        self._cum = np.concatenate([[0.0], np.cumsum(masses)])

    @property
    def segments(self):
        """``(Polynomial, Interval)`` pairs in the global variable."""
        return tuple((b.compose(_local_map(iv.lower, iv.upper)), iv)
                     for b, iv in zip(self._local, self.intervals))

    @property
    def local_segments(self):
        return self._local

    @property
    def support(self) -> Interval:
        return Interval(float(self.knots[0]), float(self.knots[-1]))

    @property
    def mass(self) -> float:
        return float(self._cum[-1])

    def _locate(self, flat):
        return np.clip(np.searchsorted(self.knots, flat, side="right") - 1, 0,
                       len(self.intervals) - 1)

    @staticmethod
    def _to_t(iv: Interval, x):
        return (x - iv.midpoint) / (0.5 * iv.width)

    def segment_value(self, j: int, x, k: int = 0):
        """k-th x-derivative of segment ``j`` at ``x`` (may lie outside it)."""
        iv = self.intervals[j]
        b = self._local[j].derivative(k) if k else self._local[j]
        return b(self._to_t(iv, np.asarray(x, dtype=float))) / (0.5 * iv.width) ** k

    def pdf(self, x):
        xa = np.asarray(x, dtype=float)
        flat = xa.ravel()
        out = np.zeros_like(flat)
        idx = self._locate(flat)
        inside = (flat >= self.knots[0]) & (flat <= self.knots[-1])
        for j, (b, iv) in enumerate(zip(self._local, self.intervals)):
            sel = inside & (idx == j)
            if sel.any():
                out[sel] = b(self._to_t(iv, flat[sel]))
        out = out.reshape(xa.shape)
        return out.item() if out.ndim == 0 else out

    __call__ = pdf

    def _cdf_raw(self, x):
        flat = np.asarray(x, dtype=float).ravel()
        idx = self._locate(flat)
        out = np.empty_like(flat)
        for j, (b, iv) in enumerate(zip(self._local, self.intervals)):
            sel = idx == j
            if sel.any():
                A = b.antiderivative()
                out[sel] = self._cum[j] + 0.5 * iv.width * (A(self._to_t(iv, flat[sel])) - A(-1.0))
        return out.reshape(np.shape(x))

    def cdf(self, x):
        """Cumulative mass from the left end, accumulated segment by segment."""
        xa = np.asarray(x, dtype=float)
        if not np.all(self.support.contains(xa)):
            raise DomainError("cdf argument outside the support")
        out = np.clip(self._cdf_raw(xa) / self.mass, 0.0, 1.0)
        out = np.where(xa == self.knots[0], 0.0, out)
        return out.item() if out.ndim == 0 else out

    def quantile(self, q):
        qa = np.asarray(q, dtype=float)
        if np.any((qa <= 0) | (qa >= 1)):
            raise DomainError("quantile level must lie in (0, 1)")
        lo, hi = self.knots[0], self.knots[-1]
        out = bisect_quantile(lambda x: self._cdf_raw(x) / self.mass,
                              lambda x: self.pdf(x) / self.mass, lo, hi, qa)
        return out.reshape(qa.shape).item() if qa.ndim == 0 else out.reshape(qa.shape)

    def _central_moment(self, c: float, k: int) -> float:
        # int (x - c)^k p(x) dx with x - c = (mid - c) + half t
        total = 0.0
        for b, iv in zip(self._local, self.intervals):
            half = 0.5 * iv.width
            lin = Polynomial([iv.midpoint - c, half])
            total += half * definite_integral(b * lin ** k, (-1.0, 1.0))
        return total / self.mass

    def moment(self, k: int) -> float:
        return self._central_moment(0.0, k)

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        return self._central_moment(self.mean(), 2)

    def entropy(self) -> float:
        total = 0.0
        clamp = _config.LOG_CLAMP
        for j, iv in enumerate(self.intervals):
            def f(x, j=j):
                v = float(self.segment_value(j, x)) / self.mass
                return -v * math.log(v) if v > clamp else 0.0
            b = self._local[j]
            pts = []
            if b.degree >= 1:
                pts = (iv.midpoint + 0.5 * iv.width * real_roots_in(b, (-1.0, 1.0))).tolist()
            total += integrate(f, iv.lower, iv.upper, points=pts)
        return total

    def scaled(self, c: float) -> "PiecewisePdf":
        cp = self.control_points
        if cp is not None:
            cp = ControlPoints(cp.x, [v * c for v in cp.y], cp.labels)
        return PiecewisePdf([(b * c, iv) for b, iv in zip(self._local, self.intervals)],
                            self.smoothness, self.signs, cp, local=True)

    def normalized(self) -> "PiecewisePdf":
        if not self.mass > 0:
            raise DegenerateError("piecewise density has no mass")
        return self.scaled(1.0 / self.mass)

    # invariant checks ------------------------------------------------------

    def continuity_defects(self):
        """``|p^(k)(x-) - p^(k)(x+)| / (1 + |p^(k)(x-)|)`` per interior knot and order."""
        out = np.zeros((len(self.intervals) - 1, self.smoothness + 1))
        for j in range(len(self.intervals) - 1):
            x = self.intervals[j].upper
            for k in range(self.smoothness + 1):
                a = float(self.segment_value(j, x, k))
                b = float(self.segment_value(j + 1, x, k))
                out[j, k] = abs(a - b) / (1.0 + abs(a))
        return out

    def certify_segments(self):
        """Exact non-negativity report for each segment (in local coordinates)."""
        reps = []
        for b in self._local:
            sup = float(np.max(np.abs(b(np.linspace(-1.0, 1.0, 65)))))
            reps.append(certify_nonneg_sturm(b, (-1.0, 1.0), atol=_config.NONNEG_ATOL * max(1.0, sup)))
        return reps

    def verify(self, K: int = _config.PIECEWISE_DEFAULT_K, interp_tol: float = 1e-8,
               cont_tol: float = 1e-6):
        """Raise :class:`InfeasibleError` if a stored invariant fails."""
        cp = self.control_points
        if cp is not None:
            for i, (xi, yi) in enumerate(zip(cp.x, cp.y)):
                for s in (i - 1, i):
                    if 0 <= s < len(self.intervals):
                        if abs(float(self.segment_value(s, xi)) - yi) > interp_tol * max(1.0, abs(yi)):
                            raise InfeasibleError(f"segment {s} misses control point {i}", violated=[i])
        if len(self.intervals) > 1:
            bad = self.continuity_defects() > cont_tol
            if bad.any():
                raise InfeasibleError("knot continuity violated", violated=np.argwhere(bad).tolist())
        t = np.linspace(-1.0, 1.0, K)
        for s, b in enumerate(self._local):
            vals = b(t)
            if np.min(vals) < -_config.NONNEG_ATOL * max(1.0, float(np.max(np.abs(vals)))):
                raise InfeasibleError(f"segment {s} negative on its sample grid", violated=[s])
        return True

    def to_dict(self):
        from .io import poly_to_dict
        return {"segments": [{"poly": poly_to_dict(p),
                              "local": poly_to_dict(b),
                              "interval": {"lower": iv.lower, "upper": iv.upper}}
                             for (p, iv), b in zip(self.segments, self._local)],
                "smoothness": self.smoothness}

    def __repr__(self):
        return f"PiecewisePdf({len(self.intervals)} segments on {self.support!r}, C={self.smoothness})"


def build(cp: ControlPoints, n: int | None = None, C: int = _config.PIECEWISE_DEFAULT_C,
          K: int = _config.PIECEWISE_DEFAULT_K) -> PiecewisePdf:
    """Assemble, normalise and verify a piecewise density.

    ``n`` defaults to ``C + 4``. Normalisation divides every segment and
    every control value by the total mass.
    """
    n = C + 4 if n is None else n
    _check_params(n, C, K, margin=3)
    signs = [cp.sign(i) for i in range(cp.n_segments)]
    local = []
    for i in range(cp.n_segments):
        targets = None
        if i:
            half = 0.5 * (cp.x[i] - cp.x[i - 1])
            b = local[-1]
            targets = [float(b.derivative(k)(1.0)) / half ** k if k else float(b(1.0))
                       for k in range(C + 1)]
        local.append(_segment_program(cp, i, n, C, K, targets)[0])
    segs = [(b * w, Interval(cp.x[i], cp.x[i + 1]))
            for i, (b, w) in enumerate(zip(local, signs))]
    raw = PiecewisePdf(segs, C, signs, cp, local=True)
    raw.verify(K)
    if not raw.mass > 0:
        raise DegenerateError("control points enclose zero mass")
    out = raw.normalized()
    out.verify(K)
    return out
