"""Polynomial roots: closed forms up to degree 3, simultaneous iteration for
the general case, and Sturm-sequence counting of distinct real roots.

The Sturm machinery runs on exact integers. Float coefficients and float
evaluation points are converted exactly (every double is a dyadic rational),
so sign variations are computed without rounding.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import reduce

import numpy as np

from .. import _config
from ..exceptions import ConvergenceError, DomainError, UnsupportedDegreeError
from .polynomial import Interval, Polynomial, as_interval, horner

__all__ = [
    "closed_form_roots",
    "numeric_roots",
    "roots",
    "real_roots_in",
    "sturm_chain",
    "sturm_count",
    "sign_at",
    "IntPoly",
]


def _sort_roots(r) -> np.ndarray:
    r = np.asarray(r, dtype=complex)
    order = np.lexsort((r.imag, r.real))
    return r[order]


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _polish(coef, z, steps=3):
    """A few Newton steps, keeping a step only if the residual shrinks."""
    c = np.asarray(coef, dtype=complex)
    dc = c[1:] * np.arange(1, c.size)
    for _ in range(steps):
        pz = horner(c, z)
        dz = horner(dc, z)
        if dz == 0:
            break
        cand = z - pz / dz
        if abs(horner(c, cand)) < abs(pz):
            z = cand
        else:
            break
    return z


def _quadratic(a0, a1, a2):
    disc = a1 * a1 - 4.0 * a2 * a0
    scale_ = a1 * a1 + abs(4.0 * a2 * a0)
    if abs(disc) <= 1e-14 * scale_:
        r = -a1 / (2.0 * a2)
        return [complex(r), complex(r)]
    if disc > 0:
        sgn = 1.0 if a1 >= 0 else -1.0
        q = -0.5 * (a1 + sgn * math.sqrt(disc))
        return [complex(q / a2), complex(a0 / q)]
    re = -a1 / (2.0 * a2)
    im = math.sqrt(-disc) / (2.0 * abs(a2))
    return [complex(re, im), complex(re, -im)]


def _cubic(a0, a1, a2, a3):
    # standard Cardano constants with a=a3, b=a2, c=a1, d=a0
    a, b, c, d = a3, a2, a1, a0
    d0 = b * b - 3.0 * a * c
    d1 = 2.0 * b ** 3 - 9.0 * a * b * c + 27.0 * a * a * d
    disc_num = 4.0 * d0 ** 3 - d1 * d1
    disc_scale = 4.0 * abs(d0) ** 3 + d1 * d1
    d0_scale = b * b + 3.0 * abs(a * c)
    if disc_scale == 0.0 or abs(disc_num) <= 1e-10 * disc_scale:
        if abs(d0) <= 1e-12 * d0_scale:
            r = -b / (3.0 * a)
            return [complex(r)] * 3
        double = (9.0 * a * d - b * c) / (2.0 * d0)
        single = (4.0 * a * b * c - 9.0 * a * a * d - b ** 3) / (a * d0)
        return [complex(double), complex(double), complex(single)]
    s = cmath.sqrt(d1 * d1 - 4.0 * d0 ** 3)
    c_plus = (d1 + s) / 2.0
    c_minus = (d1 - s) / 2.0
    big = c_plus if abs(c_plus) >= abs(c_minus) else c_minus
    C = big ** (1.0 / 3.0)
    xi = complex(-0.5, math.sqrt(3.0) / 2.0)
    out = []
    for k in range(3):
        ck = C * xi ** k
        out.append(-(b + ck + d0 / ck) / (3.0 * a))
    if disc_num > 0:
        # three distinct real roots
        out = [complex(z.real) for z in out]
    else:
        # one real root and a conjugate pair
        j = int(np.argmin([abs(z.imag) for z in out]))
        real = complex(out[j].real)
        rest = [z for i, z in enumerate(out) if i != j]
        pair = rest[0] if rest[0].imag > 0 else rest[1]
        out = [real, pair, pair.conjugate()]
    return out


def closed_form_roots(p: Polynomial) -> np.ndarray:
    """All complex roots of a polynomial of degree 1, 2 or 3.

    Linear and quadratic cases follow the discriminant; cubics use Cardano's
    formula keyed by the cubic discriminant, followed by a guarded Newton
    polish. Roots are sorted by real then imaginary part.
    """
    n = p.degree
    a = [float(v) for v in p.coef]
    if n == 1:
        r = [complex(-a[0] / a[1])]
    elif n == 2:
        r = _quadratic(*a)
    elif n == 3:
        r = _cubic(*a)
        polished = []
        for z in r:
            zp = _polish(p.coef, z)
            if z.imag == 0.0:
                zp = complex(zp.real)
            polished.append(zp)
        # keep conjugate symmetry exact after polishing
        if any(z.imag != 0 for z in polished):
            reals = [z for z in polished if z.imag == 0]
            pos = [z for z in polished if z.imag > 0]
            if len(pos) == 1 and len(reals) == 1:
                polished = [reals[0], pos[0], pos[0].conjugate()]
            else:
                polished = r
        r = polished
    else:
        raise UnsupportedDegreeError(f"closed-form roots need degree 1..3, got {n}")
    return _sort_roots(r)


# ---------------------------------------------------------------------------
# simultaneous iteration (Aberth-Ehrlich)
# ---------------------------------------------------------------------------

def _residual_ok(coef, z, rtol):
    n = coef.size - 1
    bound = rtol * np.max(np.abs(coef)) * np.maximum(1.0, np.abs(z)) ** n
    return np.abs(horner(coef, z)) <= bound


def _aberth(c: np.ndarray, max_iter: int, rtol: float) -> np.ndarray:
    n = c.size - 1
    c = c / c[-1]
    dc = c[1:] * np.arange(1, n + 1)
    centre = -c[-2] / n
    # radius from the shifted constant term, a cheap scale estimate
    shifted = horner(c, centre)
    radius = max(abs(shifted) ** (1.0 / n), 1e-3)
    angles = 2.0 * np.pi * np.arange(n) / n + 0.4
    z = centre + radius * np.exp(1j * angles)
    done = np.zeros(n, dtype=bool)
    eps = np.finfo(float).eps
    ok_since = None
    for it in range(max_iter):
        pz = horner(c, z)
        dz = horner(dc, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dz != 0, pz / dz, pz)
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, 0.0)
        w[done] = 0.0
        z = z - w
        done |= np.abs(w) <= 4.0 * eps * np.maximum(np.abs(z), 1.0)
        done |= pz == 0
        if done.all():
            break
        if _residual_ok(c, z, rtol).all():
            ok_since = it if ok_since is None else ok_since
            if it - ok_since >= 20:
                break
        else:
            ok_since = None
    return z


def numeric_roots(p: Polynomial, max_iter: int | None = None, rtol: float | None = None) -> np.ndarray:
    """All ``n`` complex roots by Aberth-Ehrlich simultaneous iteration.

    Each root satisfies ``|p(r)| <= rtol * max|a_i| * max(1, |r|)^n``.
    Exact zero roots (vanishing low-order coefficients) are split off first.

    Raises
    ------
    ConvergenceError
        If the residual bound is not met after ``max_iter`` sweeps; the
        exception's ``best`` attribute holds the final iterate.
    """
    max_iter = _config.ROOT_MAX_ITER if max_iter is None else max_iter
    rtol = _config.ROOT_RESIDUAL_RTOL if rtol is None else rtol
    if p.degree < 1:
        raise UnsupportedDegreeError("numeric roots need degree >= 1")
    c = p.coef.astype(float)
    nz = int(np.argmax(c != 0))
    zeros = np.zeros(nz, dtype=complex)
    c = c[nz:]
    if c.size == 1:
        return _sort_roots(zeros)
    if c.size == 2:
        z = np.array([-c[0] / c[1]], dtype=complex)
    else:
        z = _aberth(c, max_iter, rtol)
        if not _residual_ok(c, z, rtol).all():
            # restart from companion eigenvalues before giving up
            comp = np.roots(c[::-1]).astype(complex)
            comp = _aberth_refine(c, comp, max_iter, rtol)
            if _residual_ok(c, comp, rtol).all():
                z = comp
            else:
                raise ConvergenceError(
                    "root iteration did not reach the residual bound",
                    best=_sort_roots(np.concatenate([zeros, z])),
                )
    return _sort_roots(np.concatenate([zeros, z]))


def _aberth_refine(c, z, max_iter, rtol):
    c = c / c[-1]
    dc = c[1:] * np.arange(1, c.size)
    for _ in range(min(max_iter, 50)):
        pz = horner(c, z)
        dz = horner(dc, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dz
            w = ratio / (1.0 - ratio * inv.sum(axis=1))
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= 4 * np.finfo(float).eps * np.maximum(np.abs(z), 1.0)):
            break
    return z


def roots(p: Polynomial) -> np.ndarray:
    """Closed forms for degree <= 3, simultaneous iteration otherwise."""
    if 1 <= p.degree <= 3:
        return closed_form_roots(p)
    return numeric_roots(p)


def real_roots_in(p: Polynomial, iv, imag_tol: float = 1e-7, closed: bool = False) -> np.ndarray:
    """Sorted real parts of the numerically real roots lying in ``iv``."""
    iv = as_interval(iv)
    if p.degree < 1:
        return np.empty(0)
    r = roots(p)
    scale_ = np.maximum(1.0, np.abs(r))
    re = r.real[np.abs(r.imag) <= imag_tol * scale_]
    mask = iv.contains(re, closed=closed)
    return np.sort(re[mask])


# ---------------------------------------------------------------------------
# exact Sturm sequences
# ---------------------------------------------------------------------------

class IntPoly:
    """Integer-coefficient polynomial (ascending), used for exact signs."""

    __slots__ = ("c",)

    def __init__(self, c):
        c = list(c)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.c = c if c else [0]

    @classmethod
    def from_floats(cls, coef):
        fr = [Fraction(float(v)) for v in coef]
        den = reduce(math.lcm, (f.denominator for f in fr), 1)
        return cls([int(f * den) for f in fr]).primitive()

    @property
    def degree(self):
        return len(self.c) - 1

    def is_zero(self):
        return len(self.c) == 1 and self.c[0] == 0

    def primitive(self):
        g = reduce(math.gcd, (abs(v) for v in self.c), 0)
        if g > 1:
            return IntPoly([v // g for v in self.c])
        return self

    def derivative(self):
        if self.degree == 0:
            return IntPoly([0])
        return IntPoly([i * v for i, v in enumerate(self.c)][1:])

    def sign_at(self, x: Fraction) -> int:
        """Sign of the value at a rational point, computed homogeneously."""
        num, den = x.numerator, x.denominator
        d = self.degree
        acc = 0
        nk = 1
        dk = den ** d
        for i, v in enumerate(self.c):
            acc += v * nk * dk
            nk *= num
            if i < d:
                dk //= den
        return (acc > 0) - (acc < 0)

    def neg_prem(self, other: "IntPoly") -> "IntPoly":
        """Positive multiple of ``-(self mod other)``, made primitive."""
        a = list(self.c)
        b = other.c
        db = len(b) - 1
        lc = b[-1]
        delta = len(a) - 1 - db
        if delta < 0:
            r = IntPoly(a)
            return IntPoly([-v for v in r.c]).primitive()
        for _ in range(delta + 1):
            if len(a) - 1 < db:
                a = [lc * v for v in a]
                continue
            t = a[-1]
            a = [lc * v for v in a]
            shift = len(a) - 1 - db
            for j, bv in enumerate(b):
                a[shift + j] -= t * bv
            a.pop()
            if not a:
                a = [0]
        r = IntPoly(a)
        # prem = lc^(delta+1) * rem; undo the sign of that factor
        sgn = 1 if (lc > 0 or (delta + 1) % 2 == 0) else -1
        return IntPoly([-sgn * v for v in r.c]).primitive()


def sturm_chain(p) -> list:
    """Sturm sequence of ``p`` over the integers (primitive pseudo-remainders)."""
    ip = p if isinstance(p, IntPoly) else IntPoly.from_floats(np.asarray(p.coef))
    if ip.is_zero():
        raise DomainError("Sturm chain of the zero polynomial is undefined")
    chain = [ip]
    if ip.degree == 0:
        return chain
    chain.append(ip.derivative().primitive())
    while chain[-1].degree > 0:
        r = chain[-2].neg_prem(chain[-1])
        if r.is_zero():
            break
        chain.append(r)
    return chain


def _variations(chain, x: Fraction) -> int:
    signs = [s for s in (q.sign_at(x) for q in chain) if s != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def sign_at(p, x) -> int:
    ip = p if isinstance(p, IntPoly) else IntPoly.from_floats(np.asarray(p.coef))
    return ip.sign_at(Fraction(float(x)) if not isinstance(x, Fraction) else x)


def _open_endpoints(ip: IntPoly, iv: Interval):
    shift = _config.STURM_ENDPOINT_SHIFT * iv.width
    lo, hi = iv.lower, iv.upper
    if ip.sign_at(Fraction(lo)) == 0:
        lo = lo + shift
    if ip.sign_at(Fraction(hi)) == 0:
        hi = hi - shift
    return Fraction(lo), Fraction(hi)


def sturm_count(p, iv, chain=None) -> int:
    """Number of distinct real roots of ``p`` in the open interval ``iv``.

    Endpoints that are exact roots are displaced inward by
    ``STURM_ENDPOINT_SHIFT * width`` before counting.
    """
    iv = as_interval(iv)
    chain = sturm_chain(p) if chain is None else chain
    lo, hi = _open_endpoints(chain[0], iv)
    return _variations(chain, lo) - _variations(chain, hi)


def _count_between(chain, a: Fraction, b: Fraction) -> int:
    return _variations(chain, a) - _variations(chain, b)


def isolate(chain, lo: Fraction, hi: Fraction, max_depth: int = 80):
    """Partition ``[lo, hi]`` into float-representable cuts, each piece holding
    at most one distinct root (unless roots are closer than float spacing).

    Returns the sorted list of interior cut points (Fractions of doubles), none
    of which is a root.
    """
    ip = chain[0]
    cuts = []
    stack = [(lo, hi, 0)]
    while stack:
        a, b, depth = stack.pop()
        cnt = _count_between(chain, a, b)
        if cnt <= 1 or depth >= max_depth:
            continue
        m = Fraction(0.5 * (float(a) + float(b)))
        if not a < m < b:
            continue
        # step off exact roots
        tries = 0
        while ip.sign_at(m) == 0 and tries < 8:
            m = Fraction(float(m) + (float(b) - float(a)) * 2.0 ** -(10 + tries))
            tries += 1
        if not a < m < b or ip.sign_at(m) == 0:
            continue
        cuts.append(m)
        stack.append((a, m, depth + 1))
        stack.append((m, b, depth + 1))
    return sorted(cuts)
