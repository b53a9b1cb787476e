"""Factored (root) and partial-fraction representations, and conversions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .. import _config
from ..exceptions import (
    DistinctPoleError,
    DomainError,
    NonConvergentIntegralError,
    NonRealPolynomialError,
)
from .polynomial import Interval, Polynomial, as_interval, horner
from .roots import roots as _roots

__all__ = [
    "FactoredPolynomial",
    "RationalExpansion",
    "form2_to_form1",
    "form1_to_form2",
    "form2_to_form3",
    "form3_definite_integral",
    "form3_moment",
    "form3_evaluate",
    "form2_recursive_integral",
    "symmetrize_conjugates",
]


def symmetrize_conjugates(r, real_tol: float = 1e-9) -> np.ndarray:
    """Snap numerically computed roots of a real polynomial to exact
    conjugate pairs; roots with negligible imaginary part become real."""
    r = np.asarray(r, dtype=complex).copy()
    scale_ = np.maximum(1.0, np.abs(r))
    is_real = np.abs(r.imag) <= real_tol * scale_
    pos = np.where(~is_real & (r.imag > 0))[0]
    neg = np.where(~is_real & (r.imag < 0))[0]
    # unmatched excess goes to the real set, smallest |imag| first
    while pos.size != neg.size:
        big, side = (pos, "pos") if pos.size > neg.size else (neg, "neg")
        k = big[np.argmin(np.abs(r.imag[big]))]
        is_real[k] = True
        if side == "pos":
            pos = pos[pos != k]
        else:
            neg = neg[neg != k]
    out = list(r[is_real].real.astype(complex))
    if pos.size:
        cost = np.abs(r[pos][:, None] - np.conj(r[neg])[None, :])
        ri, ci = linear_sum_assignment(cost)
        for i, j in zip(ri, ci):
            z = 0.5 * (r[pos[i]] + np.conj(r[neg[j]]))
            out.extend([z, np.conj(z)])
    out = np.asarray(out, dtype=complex)
    return out[np.lexsort((out.imag, out.real))]


class FactoredPolynomial:
    """``leading * prod_i (x - r_i)`` with complex roots in conjugate pairs.

    Parameters
    ----------
    leading : float
        Nonzero leading coefficient.
    roots : sequence of complex
    """

    __slots__ = ("_leading", "_roots")

    def __init__(self, leading, roots):
        leading = float(leading)
        if leading == 0.0 or not np.isfinite(leading):
            raise DomainError("leading coefficient must be finite and nonzero")
        r = np.asarray(list(roots), dtype=complex).ravel()
        if not np.all(np.isfinite(r)):
            raise DomainError("roots must be finite")
        _check_conjugates(r)
        r = r[np.lexsort((r.imag, r.real))]
        r.flags.writeable = False
        self._leading = leading
        self._roots = r

    @property
    def leading(self) -> float:
        return self._leading

    @property
    def roots(self) -> np.ndarray:
        return self._roots

    @property
    def degree(self) -> int:
        return self._roots.size

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self._leading, dtype=complex)
        for r in self._roots:
            out = out * (x - r)
        out = out.real
        return out.item() if out.ndim == 0 else out

    def __repr__(self):
        return f"FactoredPolynomial(leading={self._leading!r}, roots={self._roots.tolist()!r})"


def _check_conjugates(r: np.ndarray):
    tol = _config.CONJUGATE_TOL
    cplx = r[np.abs(r.imag) > tol * np.maximum(1.0, np.abs(r))]
    if cplx.size == 0:
        return
    pos = np.sort_complex(cplx[cplx.imag > 0])
    neg = np.sort_complex(np.conj(cplx[cplx.imag < 0]))
    if pos.size != neg.size or not np.allclose(pos, neg, rtol=0.0, atol=tol * max(1.0, np.max(np.abs(cplx)))):
        raise DomainError("complex roots of a real polynomial must come in conjugate pairs")


def _elementary_expand(leading, r) -> np.ndarray:
    """Ascending coefficients of ``leading * prod (x - r_i)`` via signed
    elementary symmetric functions (built incrementally)."""
    c = np.array([1.0 + 0j])
    for z in r:
        nxt = np.zeros(c.size + 1, dtype=complex)
        nxt[1:] += c
        nxt[:-1] -= z * c
        c = nxt
    return leading * c


def form2_to_form1(f: FactoredPolynomial) -> Polynomial:
    """Expand to coefficient form; ``a_(n-k) = a_n (-1)^k e_k(r)``."""
    c = _elementary_expand(f.leading, f.roots)
    scale_ = max(1.0, float(np.max(np.abs(c))))
    if np.max(np.abs(c.imag)) > _config.IMAG_RESIDUE_TOL * scale_:
        raise NonRealPolynomialError("expanded coefficients carry an imaginary residue")
    return Polynomial(c.real)


def form1_to_form2(p: Polynomial) -> FactoredPolynomial:
    """Factor via closed-form roots (degree <= 3) or simultaneous iteration."""
    if p.degree < 1:
        raise DomainError("factoring needs degree >= 1")
    r = symmetrize_conjugates(_roots(p))
    return FactoredPolynomial(p.leading, r)


@dataclass(frozen=True)
class RationalExpansion:
    """``sum_i c_i / (x - r_i)`` with distinct poles and nonzero residues."""

    residues: tuple
    poles: tuple

    def __post_init__(self):
        c = tuple(complex(v) for v in self.residues)
        r = tuple(complex(v) for v in self.poles)
        if len(c) != len(r) or not c:
            raise DomainError("residues and poles must be nonempty and of equal length")
        if any(v == 0 for v in c):
            raise DomainError("residues must be nonzero")
        for i in range(len(r)):
            for j in range(i):
                if abs(r[i] - r[j]) <= _config.POLE_SEPARATION_TOL:
                    raise DistinctPoleError(f"poles {r[j]} and {r[i]} coincide")
        object.__setattr__(self, "residues", c)
        object.__setattr__(self, "poles", r)

    @property
    def terms(self):
        return list(zip(self.residues, self.poles))

    def __call__(self, x):
        return form3_evaluate(self, x)


def form3_evaluate(r: RationalExpansion, x):
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=complex)
    for c, z in r.terms:
        out = out + c / (x - z)
    return out


def form2_to_form3(numer: Polynomial, denom: FactoredPolynomial) -> RationalExpansion:
    """Partial fractions of ``numer / denom`` with residues ``s(r_i) / q'(r_i)``."""
    if numer.degree >= denom.degree:
        raise DomainError("numerator degree must be below the denominator degree")
    r = denom.roots
    for i in range(r.size):
        for j in range(i):
            if abs(r[i] - r[j]) <= _config.POLE_SEPARATION_TOL:
                raise DistinctPoleError(f"repeated pole {r[i]}")
    residues = []
    for i, z in enumerate(r):
        dq = denom.leading * np.prod([z - w for k, w in enumerate(r) if k != i])
        residues.append(horner(numer.coef.astype(complex), z) / dq)
    keep = [k for k, c in enumerate(residues) if c != 0]
    return RationalExpansion(tuple(residues[k] for k in keep), tuple(r[k] for k in keep))


def _check_poles(r: RationalExpansion, iv: Interval):
    for z in r.poles:
        if z.imag == 0.0 and iv.lower <= z.real <= iv.upper:
            raise NonConvergentIntegralError(f"real pole {z.real} lies in [{iv.lower}, {iv.upper}]")


def _real_part(v: complex) -> float:
    if abs(v.imag) > _config.IMAG_RESIDUE_TOL * max(1.0, abs(v.real)):
        return v
    return float(v.real)


def _logdiff(iv: Interval, z: complex) -> complex:
    # principal logs; no branch crossing when the pole is off [l, u]
    return np.log(complex(iv.upper - z)) - np.log(complex(iv.lower - z))


def form3_definite_integral(r: RationalExpansion, iv) -> float:
    """``sum_i c_i [ln(u - r_i) - ln(l - r_i)]``.

    Raises
    ------
    NonConvergentIntegralError
        If a real pole lies in the closed support.
    """
    iv = as_interval(iv)
    _check_poles(r, iv)
    total = sum(c * _logdiff(iv, z) for c, z in r.terms)
    return _real_part(complex(total))


def form3_moment(r: RationalExpansion, k: int, iv) -> float:
    """``int_l^u x^k sum_i c_i / (x - r_i) dx`` by exact division
    ``x^k / (x - r) = sum_j r^j x^(k-1-j) + r^k / (x - r)``."""
    if k < 0:
        raise DomainError("moment order must be >= 0")
    iv = as_interval(iv)
    _check_poles(r, iv)
    l, u = iv.lower, iv.upper
    total = 0j
    for c, z in r.terms:
        poly_part = sum(z ** j * (u ** (k - j) - l ** (k - j)) / (k - j) for j in range(k))
        total += c * (poly_part + z ** k * _logdiff(iv, z))
    return _real_part(complex(total))


def form2_recursive_integral(f: FactoredPolynomial) -> Polynomial:
    """Antiderivative of ``f`` from the product recursion

    ``I_m = (x - r_m) I_(m-1) - int I_(m-1)``, with the k-fold companion
    ``J(m, k) = (x - r_m) J(m-1, k) - (k+1) J(m-1, k+1)`` and
    ``I_1 = x^2/2 - r_1 x``. The result is scaled by the leading coefficient
    and is defined up to an additive constant.
    """
    r = f.roots
    n = r.size
    if n == 0:
        return Polynomial([0.0, f.leading])
    memo = {}

    def kfold(c: np.ndarray, k: int) -> np.ndarray:
        out = np.zeros(c.size + k, dtype=complex)
        i = np.arange(c.size)
        rise = np.ones(c.size)
        for j in range(1, k + 1):
            rise *= i + j
        out[k:] = c / rise
        return out

    def J(m: int, k: int) -> np.ndarray:
        key = (m, k)
        if key in memo:
            return memo[key]
        if m == 1:
            base = np.array([-r[0], 1.0], dtype=complex)
            val = kfold(base, k + 1)
        else:
            a = J(m - 1, k)
            b = J(m - 1, k + 1)
            shifted = np.zeros(a.size + 1, dtype=complex)
            shifted[1:] += a
            shifted[:-1] -= r[m - 1] * a
            val = np.zeros(max(shifted.size, b.size), dtype=complex)
            val[: shifted.size] += shifted
            val[: b.size] -= (k + 1) * b
        memo[key] = val
        return val

    c = f.leading * J(n, 0)
    scale_ = max(1.0, float(np.max(np.abs(c))))
    if np.max(np.abs(c.imag)) > 1e-8 * scale_:
        raise NonRealPolynomialError("recursive integral carries an imaginary residue")
    return Polynomial(c.real)
