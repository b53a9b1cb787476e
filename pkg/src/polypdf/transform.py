"""Changes of variable for polynomial densities.

Affine maps keep a density polynomial. The two support extensions from
``(-1, 1)`` and general monotone maps produce a :class:`TransformedDensity`
that evaluates ``p(g^{-1}(x)) |d g^{-1}/dx|`` pointwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._numeric import integrate
from .certify import minimum_on
from .distribution import PolynomialPdf, make_pdf
from .exceptions import DegenerateError, DomainError
from .piecewise import PiecewisePdf
from .polycore import Interval, Polynomial, as_interval
from .polycore.roots import real_roots_in

__all__ = [
    "TransformKind",
    "MonotoneMap",
    "TransformedDensity",
    "affine_remap",
    "to_semi_infinite",
    "to_real_line",
    "lemma1_constructors",
    "monotone_transform",
    "parse_transform",
]

UNIT = Interval(-1.0, 1.0)


class TransformKind(enum.Enum):
    AFFINE_SUPPORT_MAP = "AffineSupportMap"
    SEMI_INFINITE = "SemiInfinite"
    REAL_LINE = "RealLine"
    GENERAL_MONOTONE = "GeneralMonotone"


@dataclass(frozen=True)
class MonotoneMap:
    """Strictly monotone ``g`` with its inverse and the inverse's derivative."""

    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    inverse_derivative: Callable[[np.ndarray], np.ndarray]
    kind: TransformKind = TransformKind.GENERAL_MONOTONE
    parameters: dict = field(default_factory=dict)

    @classmethod
    def affine(cls, b1: float, b0: float) -> "MonotoneMap":
        if b1 == 0 or not (math.isfinite(b1) and math.isfinite(b0)):
            raise DomainError("affine map needs a finite nonzero slope")
        return cls(lambda x: b1 * np.asarray(x) + b0,
                   lambda y: (np.asarray(y) - b0) / b1,
                   lambda y: np.full(np.shape(y), 1.0 / b1),
                   TransformKind.AFFINE_SUPPORT_MAP, {"b1": float(b1), "b0": float(b0)})

    @classmethod
    def semi_infinite(cls) -> "MonotoneMap":
        # y = (2x - 1)/(2x + 1) maps (0, inf) onto (-1, 1)
        return cls(lambda y: (1.0 + np.asarray(y)) / (2.0 * (1.0 - np.asarray(y))),
                   lambda x: (2.0 * np.asarray(x) - 1.0) / (2.0 * np.asarray(x) + 1.0),
                   lambda x: 1.0 / (np.asarray(x) + 0.5) ** 2,
                   TransformKind.SEMI_INFINITE)

    @classmethod
    def real_line(cls) -> "MonotoneMap":
        return cls(lambda y: np.arctanh(y), lambda x: np.tanh(x),
                   lambda x: 1.0 / np.cosh(x) ** 2, TransformKind.REAL_LINE)

    def is_increasing_on(self, iv: Interval, n: int = 257) -> bool:
        """Check strict monotonicity on a grid; raise if the map is not monotone."""
        t = np.linspace(iv.lower, iv.upper, n)[1:-1]
        g = np.asarray(self.forward(t), dtype=float)
        d = np.diff(g)
        if np.all(d > 0):
            return True
        if np.all(d < 0):
            return False
        raise DomainError("map is not strictly monotone on the support")


class TransformedDensity:
    """Density of ``g(X)`` for a polynomial density ``X`` and monotone ``g``.

    Parameters
    ----------
    base : PolynomialPdf
    g : MonotoneMap
    """

    def __init__(self, base: PolynomialPdf, g: MonotoneMap):
        self.base = base
        self.g = g
        self.kind = g.kind
        self.parameters = dict(g.parameters)
        self.increasing = g.is_increasing_on(base.support)
        with np.errstate(divide="ignore"):
            ends = sorted(float(g.forward(v)) for v in (base.support.lower, base.support.upper))
        self.support = tuple(ends)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            y = np.asarray(self.g.inverse(x), dtype=float)
            jac = np.abs(np.asarray(self.g.inverse_derivative(x), dtype=float))
            inside = (x > self.support[0]) & (x < self.support[1]) & np.isfinite(y)
            val = np.where(inside, self.base.poly(np.where(inside, y, 0.0)) * jac, 0.0)
        return val.item() if val.ndim == 0 else val

    __call__ = pdf

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.base.support
        with np.errstate(all="ignore"):
            y = np.clip(np.asarray(self.g.inverse(x), dtype=float), lo, hi)
        y = np.where(x <= self.support[0], lo if self.increasing else hi, y)
        y = np.where(x >= self.support[1], hi if self.increasing else lo, y)
        F = np.asarray(self.base.cdf(y))
        out = F if self.increasing else 1.0 - F
        return out.item() if out.ndim == 0 else out

    def quantile(self, q):
        q = np.asarray(q, dtype=float)
        y = self.base.quantile(q if self.increasing else 1.0 - q)
        out = np.asarray(self.g.forward(y), dtype=float)
        return out.item() if out.ndim == 0 else out

    def mass(self, tail: float = 1e-10) -> float:
        """Quadrature mass; infinite ends are cut where the base has ``tail`` mass left."""
        lo, hi = self.support
        if not math.isfinite(lo):
            lo = float(self.quantile(tail))
        if not math.isfinite(hi):
            hi = float(self.quantile(1.0 - tail))
        # split at images of base quantiles so heavy tails are resolved
        levels = np.concatenate([np.logspace(np.log10(tail), -1, 10), np.linspace(0.1, 0.9, 9),
                                 1.0 - np.logspace(-1, np.log10(tail), 10)])
        cuts = np.unique(np.asarray(self.quantile(levels), dtype=float))
        return integrate(lambda x: float(self.pdf(x)), lo, hi, points=cuts.tolist(),
                         epsabs=1e-13, epsrel=1e-10)

    def to_dict(self):
        from .io import pdf_to_dict
        return {"transform": self.kind.value, "parameters": self.parameters,
                "base": pdf_to_dict(self.base)}

    def __repr__(self):
        return f"TransformedDensity({self.kind.value}, support={self.support})"


def affine_remap(d: PolynomialPdf, target) -> PolynomialPdf:
    """Move a density to ``target`` by the increasing affine map between supports."""
    target = as_interval(target)
    src = d.support
    if src == target:
        return d
    # y in target <- x = l + (y - l') w_src / w_tgt
    ratio = src.width / target.width
    inner = Polynomial([src.lower - target.lower * ratio, ratio])
    return PolynomialPdf(d.poly.compose(inner) * ratio, target, d.certificate)


def _require_unit(d: PolynomialPdf):
    if d.support != UNIT:
        raise DomainError("support must be (-1, 1); remap with affine_remap first")


def to_semi_infinite(d: PolynomialPdf) -> TransformedDensity:
    """Extend a density on ``(-1, 1)`` to ``(0, inf)``."""
    _require_unit(d)
    return TransformedDensity(d, MonotoneMap.semi_infinite())


def to_real_line(d: PolynomialPdf) -> TransformedDensity:
    """Extend a density on ``(-1, 1)`` to the real line by ``x = atanh(y)``."""
    _require_unit(d)
    return TransformedDensity(d, MonotoneMap.real_line())


def _split_segments(p: Polynomial, iv: Interval, positive_only: bool):
    cuts = [iv.lower]
    if p.degree >= 1:
        cuts += [float(r) for r in real_roots_in(p, iv)]
    cuts.append(iv.upper)
    cuts = sorted(set(cuts))
    segs = []
    for a, b in zip(cuts, cuts[1:]):
        s = 1.0 if p(0.5 * (a + b)) >= 0 else -1.0
        if positive_only and s < 0:
            segs.append((Polynomial([0.0]), Interval(a, b)))
        else:
            segs.append((p * s, Interval(a, b)))
    return segs


def lemma1_constructors(p: Polynomial, iv, mode: str = "affine"):
    """Turn any polynomial into a density on ``iv``.

    Modes
    -----
    affine
        ``A (p + B)`` with the smallest shift ``B = max(0, -min p)``.
    abs, clip
        ``A |p|`` or ``A max(p, 0)`` as a :class:`PiecewisePdf` split at the
        real roots of ``p``.
    square
        ``A p^2``.
    """
    iv = as_interval(iv)
    p = p if isinstance(p, Polynomial) else Polynomial(p)
    if p.is_zero():
        raise DegenerateError("zero polynomial cannot be normalised")
    if mode == "affine":
        shift = max(0.0, -minimum_on(p, iv)[1])
        return make_pdf(p + shift, iv)
    if mode == "square":
        return make_pdf(p * p, iv)
    if mode in ("abs", "clip"):
        pp = PiecewisePdf(_split_segments(p, iv, positive_only=(mode == "clip")), smoothness=0)
        return pp.normalized()
    raise DomainError(f"unknown mode {mode!r}")


def monotone_transform(d: PolynomialPdf, g: MonotoneMap):
    """Density of ``g(X)``; an affine ``g`` keeps the result polynomial."""
    if g.kind is TransformKind.AFFINE_SUPPORT_MAP:
        b1, b0 = g.parameters["b1"], g.parameters["b0"]
        ends = sorted([b1 * d.support.lower + b0, b1 * d.support.upper + b0])
        inner = Polynomial([-b0 / b1, 1.0 / b1])
        return PolynomialPdf(d.poly.compose(inner) * (1.0 / abs(b1)), Interval(*ends), d.certificate)
    return TransformedDensity(d, g)


def parse_transform(name: str, d: PolynomialPdf):
    """Apply a transform given by its command-line name."""
    if name == "unit":
        return affine_remap(d, UNIT)
    if name == "semi-infinite":
        return to_semi_infinite(affine_remap(d, UNIT))
    if name == "real-line":
        return to_real_line(affine_remap(d, UNIT))
    if name.startswith("affine:"):
        try:
            b1, b0 = (float(v) for v in name.split(":", 1)[1].split(","))
        except ValueError as exc:
            raise DomainError(f"bad affine transform {name!r}; expected affine:b1,b0") from exc
        return monotone_transform(d, MonotoneMap.affine(b1, b0))
    raise DomainError(f"unknown transform {name!r}")
