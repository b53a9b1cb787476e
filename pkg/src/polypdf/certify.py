"""Non-negativity of a polynomial on an interval.

Three independent routes are provided:

* :func:`certify_nonneg_sturm` decides exactly, from Sturm counts and the
  signs of the polynomial in every root-free cell.
* :func:`classify_roots_theorem1` reads the verdict off the root structure
  of the factored form (even multiplicities, conjugate pairs, roots left of
  the support, an even number of odd roots right of it).
* :func:`numeric_negativity_tests` computes the integrals
  ``I1 = Im int sqrt(p)`` and ``I2 = int (p - |p|)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from . import _config
from .exceptions import DomainError
from .polycore import FactoredPolynomial, Interval, Polynomial, as_interval
from .polycore.roots import IntPoly, _open_endpoints, isolate, real_roots_in, sturm_chain

__all__ = [
    "Verdict",
    "Method",
    "NonNegativityReport",
    "certify_nonneg_sturm",
    "classify_roots_theorem1",
    "numeric_negativity_tests",
    "numeric_negativity_report",
    "minimum_on",
]


class Verdict(enum.Enum):
    NON_NEGATIVE = "NonNegative"
    HAS_NEGATIVE = "HasNegative"
    INDETERMINATE = "Indeterminate"


class Method(enum.Enum):
    STURM_EXACT = "SturmExact"
    THEOREM1 = "Theorem1"
    NUMERIC_I1I2 = "NumericI1I2"


@dataclass(frozen=True)
class NonNegativityReport:
    verdict: Verdict
    method: Method
    witnesses: tuple = field(default_factory=tuple)

    @property
    def nonnegative(self) -> bool:
        return self.verdict is Verdict.NON_NEGATIVE

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "method": self.method.value,
            "witnesses": [float(w) for w in self.witnesses],
        }


def _sign_near(ip: IntPoly, x: float, direction: int) -> int:
    """Sign of ``ip`` just to the right (+1) or left (-1) of ``x``."""
    q = ip
    fx = Fraction(x)
    k = 0
    while not q.is_zero():
        s = q.sign_at(fx)
        if s != 0:
            return s if (direction > 0 or k % 2 == 0) else -s
        q = q.derivative()
        k += 1
    return 0


def _witness_near(ip: IntPoly, a: float, b: float, from_left: bool):
    """Float point in (a, b) close to ``a`` (or ``b``) where ``ip < 0``."""
    for k in range(1, 1100):
        t = 2.0 ** -k
        x = a + (b - a) * t if from_left else b - (b - a) * t
        if not a < x < b:
            break
        if ip.sign_at(Fraction(x)) < 0:
            return x
    return None


def certify_nonneg_sturm(p: Polynomial, iv, atol: float = 0.0) -> NonNegativityReport:
    """Exact non-negativity verdict for ``p + atol`` on the open interval.

    Distinct real roots inside ``iv`` are isolated by Sturm bisection; the
    sign of ``p`` in every root-free cell is then read at an isolating cut
    (or, next to the endpoints, from the first nonvanishing derivative).
    The verdict is never ``Indeterminate``.

    Parameters
    ----------
    p : Polynomial
        Must not be identically zero.
    iv : Interval or (float, float)
    atol : float, default 0
        Allowed negative excursion; the certificate is for ``p + atol``.
    """
    iv = as_interval(iv)
    q = p + atol if atol else p
    if q.is_zero():
        raise DomainError("cannot certify the zero polynomial")
    ip = IntPoly.from_floats(q.coef)
    if ip.degree == 0:
        if ip.c[0] > 0:
            return NonNegativityReport(Verdict.NON_NEGATIVE, Method.STURM_EXACT)
        return NonNegativityReport(Verdict.HAS_NEGATIVE, Method.STURM_EXACT, (iv.midpoint,))
    chain = sturm_chain(ip)
    lo, hi = _open_endpoints(ip, iv)
    cuts = isolate(chain, lo, hi)
    witnesses = []
    if _sign_near(ip, iv.lower, +1) < 0:
        first = float(cuts[0]) if cuts else iv.upper
        w = _witness_near(ip, iv.lower, first, from_left=True)
        witnesses.append(w if w is not None else iv.lower)
    for c in cuts:
        if ip.sign_at(c) < 0:
            witnesses.append(float(c))
    if _sign_near(ip, iv.upper, -1) < 0:
        last = float(cuts[-1]) if cuts else iv.lower
        w = _witness_near(ip, last, iv.upper, from_left=False)
        witnesses.append(w if w is not None else iv.upper)
    if witnesses:
        return NonNegativityReport(Verdict.HAS_NEGATIVE, Method.STURM_EXACT, tuple(witnesses))
    return NonNegativityReport(Verdict.NON_NEGATIVE, Method.STURM_EXACT)


def _group_roots(r: np.ndarray, tol: float):
    """Cluster roots into ``(value, multiplicity, exact)`` groups; ``exact``
    is False when the members of a cluster are close but not identical."""
    groups = []
    used = np.zeros(r.size, dtype=bool)
    for i in range(r.size):
        if used[i]:
            continue
        near = np.where(~used & (np.abs(r - r[i]) <= tol * max(1.0, abs(r[i]))))[0]
        used[near] = True
        spread = float(np.max(np.abs(r[near] - r[i])))
        exact = spread <= 1e-12 * max(1.0, abs(r[i]))
        groups.append((complex(np.mean(r[near])), int(near.size), exact))
    return groups


def classify_roots_theorem1(
    f: FactoredPolynomial, iv, fallback: bool = False, root_tol: float = 1e-6
) -> NonNegativityReport:
    """Verdict from the root structure of ``a_n prod (x - r_i)``.

    For ``a_n > 0``: non-negative when every root has even multiplicity, is
    non-real, lies left of the support, or is one of an even number of
    odd-multiplicity roots right of the support. Negative values exist when
    the number of odd-multiplicity real roots above ``l`` is odd, or when it
    is even and one of them lies inside the support. For ``a_n < 0`` the
    required parity flips, since the sign on the support is
    ``sign(a_n) (-1)^k`` with ``k`` the count of odd roots above it. Anything else (roots numerically
    on an endpoint, clusters that cannot be told apart) is ``Indeterminate``
    unless ``fallback`` asks for the exact Sturm verdict.
    """
    iv = as_interval(iv)
    if f.leading == 0:
        raise DomainError("leading coefficient must be nonzero")
    want = 0 if f.leading > 0 else 1
    p = None
    groups = _group_roots(np.asarray(f.roots), root_tol)
    edge_tol = root_tol * max(1.0, abs(iv.lower), abs(iv.upper))
    odd_real = []
    ambiguous = False
    for z, mult, exact in groups:
        scale_ = max(1.0, abs(z))
        if not exact:
            ambiguous = True
        if abs(z.imag) > root_tol * scale_:
            continue  # conjugate pair
        if abs(z.imag) > 1e-12 * scale_:
            ambiguous = True  # nearly real, can't tell a pair from a double root
        if mult % 2 == 0:
            continue
        x = z.real
        if abs(x - iv.lower) <= edge_tol or abs(x - iv.upper) <= edge_tol:
            ambiguous = True
        odd_real.append(x)
    above_l = [x for x in odd_real if x > iv.lower + edge_tol]
    inside = [x for x in above_l if x < iv.upper - edge_tol]

    def _fallback():
        from .polycore import form2_to_form1

        if fallback:
            return certify_nonneg_sturm(form2_to_form1(f), iv)
        return NonNegativityReport(Verdict.INDETERMINATE, Method.THEOREM1)

    if ambiguous:
        return _fallback()
    if len(above_l) % 2 != want or inside:
        from .polycore import form2_to_form1

        p = form2_to_form1(f)
        w = _theorem1_witness(p, iv, inside)
        if w is None:
            return _fallback()
        return NonNegativityReport(Verdict.HAS_NEGATIVE, Method.THEOREM1, (w,))
    return NonNegativityReport(Verdict.NON_NEGATIVE, Method.THEOREM1)


def _theorem1_witness(p: Polynomial, iv: Interval, inside):
    cuts = [iv.lower] + sorted(inside) + [iv.upper]
    cand = []
    for a, b in zip(cuts, cuts[1:]):
        cand.extend(np.linspace(a, b, 9)[1:-1].tolist())
    cand = np.asarray(cand)
    vals = p(cand)
    k = int(np.argmin(vals))
    if vals[k] < 0:
        return float(cand[k])
    rep = certify_nonneg_sturm(p, iv)
    return rep.witnesses[0] if rep.witnesses else None


def numeric_negativity_tests(p: Polynomial, iv):
    """Return ``(I1, I2)`` with ``I1 = Im int sqrt(p)`` and
    ``I2 = int (p - |p|)``, by adaptive quadrature split at the real roots."""
    iv = as_interval(iv)
    pts = real_roots_in(p, iv) if p.degree >= 1 else np.empty(0)
    breaks = np.unique(np.concatenate([[iv.lower], pts, [iv.upper]]))
    i1 = 0.0
    i2 = 0.0
    for a, b in zip(breaks, breaks[1:]):
        if b <= a:
            continue
        i1 += quad(lambda x: np.sqrt(max(-p(x), 0.0)), a, b,
                   epsabs=_config.QUAD_EPSABS, epsrel=_config.QUAD_EPSREL, limit=_config.QUAD_LIMIT)[0]
        i2 += quad(lambda x: p(x) - abs(p(x)), a, b,
                   epsabs=_config.QUAD_EPSABS, epsrel=_config.QUAD_EPSREL, limit=_config.QUAD_LIMIT)[0]
    return i1, i2


def numeric_negativity_report(p: Polynomial, iv, tol: float | None = None) -> NonNegativityReport:
    """Verdict from the I1/I2 integrals.

    ``HasNegative`` when ``I1 > tol`` and ``I2 < -tol``; ``NonNegative`` when
    both integrals vanish identically; ``Indeterminate`` for negative mass
    below the quadrature tolerance.
    """
    tol = _config.NEGATIVITY_TOL if tol is None else tol
    iv = as_interval(iv)
    i1, i2 = numeric_negativity_tests(p, iv)
    if i1 > tol and i2 < -tol:
        xs = np.linspace(iv.lower, iv.upper, 2001)[1:-1]
        vals = p(xs)
        k = int(np.argmin(vals))
        wit = (float(xs[k]),) if vals[k] < 0 else ()
        if not wit:
            return NonNegativityReport(Verdict.INDETERMINATE, Method.NUMERIC_I1I2)
        return NonNegativityReport(Verdict.HAS_NEGATIVE, Method.NUMERIC_I1I2, wit)
    if i1 == 0.0 and i2 == 0.0:
        return NonNegativityReport(Verdict.NON_NEGATIVE, Method.NUMERIC_I1I2)
    return NonNegativityReport(Verdict.INDETERMINATE, Method.NUMERIC_I1I2)


def minimum_on(p: Polynomial, iv):
    """``(x, p(x))`` at the minimum of ``p`` over the closed interval."""
    iv = as_interval(iv)
    cand = [iv.lower, iv.upper]
    if p.degree >= 2:
        cand.extend(real_roots_in(p.derivative(), iv).tolist())
    cand = np.asarray(cand)
    vals = p(cand)
    k = int(np.argmin(vals))
    return float(cand[k]), float(vals[k])
