"""Coefficient-form polynomials and finite intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

import numpy as np

from .. import _config
from ..exceptions import DomainError

__all__ = [
    "Interval",
    "Polynomial",
    "evaluate",
    "derivative",
    "antiderivative",
    "definite_integral",
    "moment_integral",
    "add",
    "multiply",
    "scale",
    "as_interval",
]


@dataclass(frozen=True)
class Interval:
    """Finite open interval ``(lower, upper)``."""

    lower: float
    upper: float

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise DomainError(f"interval bounds must be finite, got ({lo}, {hi})")
        if not lo < hi:
            raise DomainError(f"interval requires lower < upper, got ({lo}, {hi})")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x, closed=True):
        x = np.asarray(x, dtype=float)
        if closed:
            return (x >= self.lower) & (x <= self.upper)
        return (x > self.lower) & (x < self.upper)

    def __iter__(self):
        yield self.lower
        yield self.upper

    def __repr__(self):
        return f"Interval({self.lower!r}, {self.upper!r})"


def as_interval(iv) -> Interval:
    """Coerce a 2-sequence or ``Interval`` to ``Interval``."""
    if isinstance(iv, Interval):
        return iv
    lo, hi = iv
    return Interval(lo, hi)


def _trim(c: np.ndarray) -> np.ndarray:
    if c.size == 0:
        return np.zeros(1)
    scale_ = np.max(np.abs(c))
    if scale_ == 0.0:
        return np.zeros(1)
    thresh = _config.TRIM_RTOL * scale_
    last = c.size - 1
    while last > 0 and abs(c[last]) <= thresh:
        last -= 1
    return c[: last + 1].copy()


def horner(coef, x):
    """Nested evaluation ``(..((a_n x + a_{n-1}) x + ..) x + a_0``.

    Works for real or complex ``coef`` and scalar or array ``x``.
    """
    x = np.asarray(x)
    acc = np.zeros_like(x, dtype=np.result_type(x, np.asarray(coef).dtype, float))
    acc = acc + coef[-1]
    for a in coef[-2::-1]:
        acc = acc * x + a
    return acc


class Polynomial:
    """Real polynomial ``sum_i a_i x^i`` stored by ascending coefficients.

    Instances are immutable. Trailing coefficients at or below
    ``TRIM_RTOL * max|a_i|`` are dropped, so the zero polynomial is ``[0.0]``.

    Parameters
    ----------
    coefficients : sequence of float
        ``a_0, a_1, ..., a_n``.
    """

    __slots__ = ("_coef",)

    def __init__(self, coefficients):
        if isinstance(coefficients, Polynomial):
            c = coefficients._coef.copy()
        else:
            c = np.array(coefficients, dtype=float).ravel()
        if not np.all(np.isfinite(c)):
            raise DomainError("polynomial coefficients must be finite")
        c = _trim(c)
        c.flags.writeable = False
        self._coef = c

    @property
    def coef(self) -> np.ndarray:
        return self._coef

    @property
    def degree(self) -> int:
        return self._coef.size - 1

    @property
    def leading(self) -> float:
        return float(self._coef[-1])

    def is_zero(self) -> bool:
        return self._coef.size == 1 and self._coef[0] == 0.0

    def __call__(self, x):
        out = horner(self._coef, x)
        if np.ndim(out) == 0:
            return out.item()
        return out

    def __len__(self):
        return self._coef.size

    def __iter__(self):
        return iter(self._coef.tolist())

    def __repr__(self):
        return f"Polynomial({self._coef.tolist()!r})"

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self._coef, other._coef)

    def __hash__(self):
        return hash(self._coef.tobytes())

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Real):
            other = Polynomial([other])
        if not isinstance(other, Polynomial):
            return NotImplemented
        n = max(self._coef.size, other._coef.size)
        c = np.zeros(n)
        c[: self._coef.size] += self._coef
        c[: other._coef.size] += other._coef
        return Polynomial(c)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self._coef)

    def __sub__(self, other):
        if isinstance(other, Real):
            other = Polynomial([other])
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Real):
            return Polynomial(self._coef * float(other))
        if not isinstance(other, Polynomial):
            return NotImplemented
        return Polynomial(np.convolve(self._coef, other._coef))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Real):
            return NotImplemented
        return Polynomial(self._coef / float(other))

    def __pow__(self, k: int):
        if k < 0 or int(k) != k:
            raise DomainError("polynomial powers must be nonnegative integers")
        out = Polynomial([1.0])
        for _ in range(int(k)):
            out = out * self
        return out

    def compose(self, inner: "Polynomial") -> "Polynomial":
        """Return ``self(inner(x))``."""
        out = Polynomial([self._coef[-1]])
        for a in self._coef[-2::-1]:
            out = out * inner + a
        return out

    # calculus -------------------------------------------------------------

    def derivative(self, k: int = 1) -> "Polynomial":
        return derivative(self, k)

    def antiderivative(self, k: int = 1) -> "Polynomial":
        return antiderivative(self, k)

    def integrate(self, iv) -> float:
        return definite_integral(self, iv)

    def moment(self, k: int, iv) -> float:
        return moment_integral(self, k, iv)


def evaluate(p: Polynomial, x):
    """Evaluate ``p`` at ``x`` by Horner's recursion."""
    return p(x)


def derivative(p: Polynomial, k: int = 1) -> Polynomial:
    """k-th derivative; ``a_i * i!/(i-k)!`` becomes the coefficient of ``x^(i-k)``."""
    if k < 1:
        raise DomainError("derivative order must be >= 1")
    n = p.degree
    if k > n:
        return Polynomial([0.0])
    i = np.arange(k, n + 1)
    # falling factorial i (i-1) ... (i-k+1)
    fall = np.ones(i.size)
    for j in range(k):
        fall *= i - j
    return Polynomial(p.coef[k:] * fall)


def antiderivative(p: Polynomial, k: int = 1) -> Polynomial:
    """k-fold antiderivative with all integration constants zero."""
    if k < 1:
        raise DomainError("antiderivative order must be >= 1")
    n = p.degree
    i = np.arange(n + 1)
    rise = np.ones(n + 1)
    for j in range(1, k + 1):
        rise *= i + j
    c = np.zeros(n + 1 + k)
    c[k:] = p.coef / rise
    return Polynomial(c)


def _power_diff(iv: Interval, m: np.ndarray) -> np.ndarray:
    return iv.upper ** m - iv.lower ** m


def definite_integral(p: Polynomial, iv) -> float:
    """``sum_i a_i (u^(i+1) - l^(i+1)) / (i+1)``."""
    iv = as_interval(iv)
    m = np.arange(1, p.degree + 2)
    return float(np.sum(p.coef / m * _power_diff(iv, m)))


def moment_integral(p: Polynomial, k: int, iv) -> float:
    """``int_l^u x^k p(x) dx``; ``k = 0`` is the plain definite integral."""
    if k < 0:
        raise DomainError("moment order must be >= 0")
    iv = as_interval(iv)
    m = np.arange(k + 1, p.degree + k + 2)
    return float(np.sum(p.coef / m * _power_diff(iv, m)))


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    return p + q


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def scale(p: Polynomial, c: float) -> Polynomial:
    return p * float(c)
