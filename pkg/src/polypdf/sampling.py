"""Random variates from polynomial and piecewise densities.

The base generator is SplitMix64 used as a counter-based stream. A user
seed ``seed`` is first hashed to the stream key ``s = mix(seed)``; the i-th
64-bit output (``i = 1, 2, ...``) is then
``mix(s + i * 0x9E3779B97F4A7C15 mod 2^64)`` where::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2^64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB   (mod 2^64)
    z =  z ^ (z >> 31)

and a uniform variate in ``(0, 1)`` is ``((z >> 11) + 0.5) * 2^-53``.
Child ``j`` from :meth:`GeneratorState.spawn` gets the user seed
``mix(s ^ ((j + 1) * 0xD1B54A32D192ED03 mod 2^64))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _config
from .distribution import PolynomialPdf
from .exceptions import DomainError, EnvelopeError
from .piecewise import PiecewisePdf
from .polycore import Interval, Polynomial, as_interval
from .polycore.roots import real_roots_in

__all__ = [
    "GeneratorState",
    "DiscretizedCdf",
    "Envelope",
    "inverse_cdf_sample",
    "build_envelope",
    "check_envelope",
    "rejection_sample",
    "random_poly_stats",
    "sample",
]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SPAWN = 0xD1B54A32D192ED03
_MASK = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _mix_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class GeneratorState:
    """Owned SplitMix64 stream position.

    Parameters
    ----------
    seed : int
        Reduced modulo ``2^64``.
    """

    def __init__(self, seed: int = 0):
        self.seed = int(seed) & _MASK
        self.key = _mix_int(self.seed)
        self.counter = 0

    def next_uint64(self, count: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        self.counter += count
        with np.errstate(over="ignore"):
            return _mix(np.uint64(self.key) + idx * _GAMMA)

    def uniform(self, count: int) -> np.ndarray:
        """``count`` variates in the open interval ``(0, 1)``."""
        z = self.next_uint64(count)
        return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53

    def spawn(self, k: int):
        """``k`` independent child streams with documented seeds."""
        return [GeneratorState(_mix_int(self.key ^ (((j + 1) * _SPAWN) & _MASK))) for j in range(k)]

    def __repr__(self):
        return f"GeneratorState(seed={self.seed}, counter={self.counter})"


# ---------------------------------------------------------------------------
# inverse transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscretizedCdf:
    """Tabulated CDF ``(x_i, F_i)`` inverted by linear interpolation."""

    x: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        F = np.asarray(self.F, dtype=float)
        if x.ndim != 1 or x.shape != F.shape or x.size < 2:
            raise DomainError("grid needs matching x and F with at least two nodes")
        if np.any(np.diff(x) <= 0):
            raise DomainError("grid x must be strictly increasing")
        if np.any(np.diff(F) < 0) or F[0] != 0.0 or F[-1] != 1.0 or np.any((F < 0) | (F > 1)):
            raise DomainError("F must rise from 0 to 1 without decreasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "F", F)

    @classmethod
    def from_density(cls, d, nodes: int = _config.DEFAULT_GRID) -> "DiscretizedCdf":
        if nodes < 64:
            raise DomainError("grid resolution must be at least 64")
        lo, hi = d.support
        x = np.linspace(lo, hi, nodes)
        F = np.maximum.accumulate(np.clip(np.asarray(d.cdf(x), dtype=float), 0.0, 1.0))
        F[0], F[-1] = 0.0, 1.0
        return cls(x, F)

    def invert(self, u) -> np.ndarray:
        """``x_i + (x_{i+1} - x_i)(u - F_i) / (F_{i+1} - F_i)`` in the bracketing cell."""
        u = np.asarray(u, dtype=float)
        i = np.clip(np.searchsorted(self.F, u, side="right") - 1, 0, self.x.size - 2)
        F0, F1 = self.F[i], self.F[i + 1]
        x0, x1 = self.x[i], self.x[i + 1]
        dF = F1 - F0
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(dF > 0, x0 + (x1 - x0) * (u - F0) / dF, x1)
        return np.clip(x, self.x[0], self.x[-1])

    def error_bound(self, d) -> float:
        """Interpolation error bound ``max|p'| h^2 / 8`` on the CDF."""
        h = float(np.max(np.diff(self.x)))
        segs = [(d.poly, as_interval(d.support))] if isinstance(d, PolynomialPdf) else list(d.segments)
        slope = 0.0
        for p, iv in segs:
            dp = p.derivative()
            cand = [iv.lower, iv.upper]
            if dp.degree >= 2:
                cand += real_roots_in(dp.derivative(), iv).tolist()
            slope = max(slope, float(np.max(np.abs(dp(np.asarray(cand))))))
        return slope * h * h / 8.0


def inverse_cdf_sample(d, g: GeneratorState, count: int, grid: int = _config.DEFAULT_GRID) -> np.ndarray:
    """Variates by inverting the piecewise-linear CDF on ``grid`` uniform nodes."""
    table = DiscretizedCdf.from_density(d, grid)
    return table.invert(g.uniform(int(count)))


# ---------------------------------------------------------------------------
# rejection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Envelope:
    """Piecewise step or linear function over ``knots``.

    ``left[i]`` and ``right[i]`` are the heights at the ends of cell ``i``;
    they coincide for a step envelope.
    """

    knots: np.ndarray
    left: np.ndarray
    right: np.ndarray
    kind: str = "step"

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        a = np.asarray(self.left, dtype=float)
        b = np.asarray(self.right, dtype=float)
        if k.ndim != 1 or k.size < 2 or np.any(np.diff(k) <= 0):
            raise DomainError("envelope knots must be strictly increasing")
        if a.shape != (k.size - 1,) or b.shape != a.shape:
            raise DomainError("one pair of heights per cell")
        if np.any(a < 0) or np.any(b < 0):
            raise DomainError("envelope heights must be nonnegative")
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "left", a)
        object.__setattr__(self, "right", b)

    @classmethod
    def step(cls, knots, heights) -> "Envelope":
        h = np.asarray(heights, dtype=float)
        return cls(knots, h, h, "step")

    @property
    def cell_areas(self) -> np.ndarray:
        return 0.5 * (self.left + self.right) * np.diff(self.knots)

    @property
    def area(self) -> float:
        return float(np.sum(self.cell_areas))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i = np.clip(np.searchsorted(self.knots, x, side="right") - 1, 0, self.left.size - 1)
        t = (x - self.knots[i]) / (self.knots[i + 1] - self.knots[i])
        v = self.left[i] + t * (self.right[i] - self.left[i])
        v = np.where((x < self.knots[0]) | (x > self.knots[-1]), 0.0, v)
        return v.item() if v.ndim == 0 else v

    def draw(self, u_cell, u_pos):
        """Proposals from the normalised envelope."""
        cum = np.concatenate([[0.0], np.cumsum(self.cell_areas)])
        cum /= cum[-1]
        i = np.clip(np.searchsorted(cum, u_cell, side="right") - 1, 0, self.left.size - 1)
        x0, w = self.knots[i], np.diff(self.knots)[i]
        a, b = self.left[i], self.right[i]
        # invert the trapezoid cdf a t + (b - a) t^2 / 2 = u (a + b) / 2 on t in (0, 1)
        c = u_pos * 0.5 * (a + b)
        slope = b - a
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(a * a + 2.0 * slope * c, 0.0))
            t = np.where(np.abs(slope) > 1e-14 * np.maximum(a + b, 1e-300),
                         2.0 * c / (a + disc), u_pos)
        return x0 + np.clip(t, 0.0, 1.0) * w


def _segments(density, support: Interval):
    if isinstance(density, PolynomialPdf):
        return [(density.poly, density.support)]
    if isinstance(density, PiecewisePdf):
        return [(p * (1.0 / density.mass), iv) for p, iv in density.segments]
    return None


def _poly_max(p: Polynomial, a: float, b: float) -> float:
    cand = [a, b]
    if p.degree >= 2:
        cand += real_roots_in(p.derivative(), (a, b)).tolist()
    return float(np.max(p(np.asarray(cand))))


def _evaluator(density) -> Callable:
    if isinstance(density, (PolynomialPdf, PiecewisePdf)):
        if isinstance(density, PiecewisePdf):
            m = density.mass
            return lambda x: np.asarray(density.pdf(x), dtype=float) / m
        return lambda x: np.asarray(density.pdf(x), dtype=float)
    return lambda x: np.asarray(density(x), dtype=float)


def build_envelope(density, support=None, cells: int = 64, kind: str = "step",
                   margin: float = _config.ENVELOPE_MARGIN) -> Envelope:
    """Step (per-cell maximum) or linear (chord plus gap) upper bound.

    Cell maxima are exact for polynomial and piecewise densities; other
    callables are bounded from 65 samples per cell.
    """
    if cells < 1:
        raise DomainError("need at least one cell")
    if support is None:
        support = density.support
    iv = as_interval(support)
    knots = np.linspace(iv.lower, iv.upper, cells + 1)
    segs = _segments(density, iv)
    f = _evaluator(density)

    def cell_max(fun_poly, a, b):
        # maximum over [a, b] of a polynomial expression built per segment
        best = -np.inf
        if segs is None:
            xs = np.linspace(a, b, 65)
            return float(np.max(fun_poly(None, xs)))
        for p, s in segs:
            lo, hi = max(a, s.lower), min(b, s.upper)
            if hi > lo:
                best = max(best, _poly_max(fun_poly(p, None), lo, hi))
        return best

    left = np.empty(cells)
    right = np.empty(cells)
    for i in range(cells):
        a, b = knots[i], knots[i + 1]
        if kind == "step":
            top = cell_max(lambda p, xs: p if p is not None else f(xs), a, b)
            left[i] = right[i] = max(top, 0.0) * (1.0 + margin) + margin
        elif kind == "linear":
            fa, fb = float(f(a)), float(f(b))
            if segs is not None:
                # densities may jump at a knot; use one-sided limits in the cell
                fa = max(float(p(a)) for p, s in segs if s.lower <= a < s.upper or (a == s.upper == b)) \
                    if any(s.lower <= a < s.upper for p, s in segs) else fa
            chord = Polynomial([fa - (fb - fa) / (b - a) * a, (fb - fa) / (b - a)])
            gap = cell_max(lambda p, xs: (p - chord) if p is not None else f(xs) - chord(xs), a, b)
            lift = max(gap, 0.0)
            left[i] = max(fa + lift, 0.0) * (1.0 + margin) + margin
            right[i] = max(fb + lift, 0.0) * (1.0 + margin) + margin
        else:
            raise DomainError(f"unknown envelope kind {kind!r}")
    env = Envelope(knots, left, right, kind)
    check_envelope(env, density, iv)
    return env


def check_envelope(env: Envelope, density, support=None, points: int = 1000):
    """Raise :class:`EnvelopeError` at the first grid point where the density pokes out."""
    iv = as_interval(density.support if support is None else support)
    x = np.linspace(iv.lower, iv.upper, points)
    f = _evaluator(density)(x)
    e = env(x)
    bad = np.nonzero(f > e + _config.ENVELOPE_MARGIN)[0]
    if bad.size:
        w = float(x[bad[0]])
        raise EnvelopeError(f"envelope below the density at x={w!r}", witness=w)
    return True


@dataclass(frozen=True)
class RejectionResult:
    samples: np.ndarray
    acceptance_rate: float
    proposed: int


def rejection_sample(density, envelope: Envelope, g: GeneratorState, count: int,
                     batch: int = 4096) -> RejectionResult:
    """Accept-reject draws under ``envelope``.

    Each proposal consumes three consecutive uniforms (cell, position,
    acceptance). The acceptance rate counts proposals up to the last accepted
    one.
    """
    f = _evaluator(density)
    out = []
    proposed = 0
    need = int(count)
    while need > 0:
        u = g.uniform(3 * batch).reshape(batch, 3)
        x = envelope.draw(u[:, 0], u[:, 1])
        fx = f(x)
        ex = envelope(x)
        viol = np.nonzero(fx > ex * (1.0 + _config.ENVELOPE_MARGIN) + _config.ENVELOPE_MARGIN)[0]
        if viol.size:
            w = float(x[viol[0]])
            raise EnvelopeError(f"density exceeds the envelope at x={w!r}", witness=w)
        acc = np.nonzero(u[:, 2] * ex <= fx)[0]
        if acc.size >= need:
            last = acc[need - 1]
            out.append(x[acc[:need]])
            proposed += int(last) + 1
            need = 0
        else:
            out.append(x[acc])
            proposed += batch
            need -= acc.size
    samples = np.concatenate(out) if out else np.empty(0)
    rate = samples.size / proposed if proposed else math.nan
    return RejectionResult(samples, rate, proposed)


def random_poly_stats(means, variances, x):
    """Mean and variance of ``sum a_i x^i`` with independent coefficients."""
    m = np.asarray(means, dtype=float)
    v = np.asarray(variances, dtype=float)
    if m.shape != v.shape:
        raise DomainError("means and variances need the same length")
    if np.any(v < 0):
        raise DomainError("variances must be nonnegative")
    x = np.asarray(x, dtype=float)
    powers = x[..., None] ** np.arange(m.size)
    mean = powers @ m
    var = (powers ** 2) @ v
    return (mean.item(), var.item()) if x.ndim == 0 else (mean, var)


def sample(d, g: GeneratorState, count: int, method: str = "inverse",
           grid: int = _config.DEFAULT_GRID, cells: int = 64, kind: str = "step") -> np.ndarray:
    """Dispatch to the inverse-CDF or rejection sampler."""
    if method == "inverse":
        return inverse_cdf_sample(d, g, count, grid)
    if method == "rejection":
        return rejection_sample(d, build_envelope(d, d.support, cells, kind), g, count).samples
    raise DomainError(f"unknown sampling method {method!r}")
