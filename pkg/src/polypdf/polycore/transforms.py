"""Exponential integral transforms of a polynomial over a finite interval."""

from __future__ import annotations

import math

import numpy as np

from .polynomial import Polynomial, as_interval, definite_integral, horner

__all__ = ["char_function", "mgf", "exp_transform"]

# |s| * half_width below which the power series is used
_SERIES_SWITCH = 4.0


def _shifted(p: Polynomial, c: float) -> np.ndarray:
    """Coefficients of ``p(y + c)``."""
    return p.compose(Polynomial([c, 1.0])).coef


def _by_parts(q: np.ndarray, h: float, s: complex) -> complex:
    """``int_{-h}^{h} q(y) e^{s y} dy`` by repeated integration by parts,
    terminating at the constant n-th derivative."""
    total = 0j
    d = q.astype(complex)
    sign = 1.0
    sk = s
    ep, em = np.exp(s * h), np.exp(-s * h)
    while True:
        total += sign * (horner(d, h) * ep - horner(d, -h) * em) / sk
        if d.size == 1:
            break
        d = d[1:] * np.arange(1, d.size)
        sign = -sign
        sk = sk * s
    return total


def _series(q: np.ndarray, h: float, s: complex) -> complex:
    """``sum_m s^m/m! int y^m q(y) dy`` over ``(-h, h)``."""
    n = q.size - 1
    qmax = 2.0 * h * float(np.sum(np.abs(q) * h ** np.arange(n + 1)))
    total = 0j
    term_scale = 1.0 + 0j
    m = 0
    while True:
        idx = np.arange(n + 1) + m + 1
        mom = np.sum(q * (h ** idx - (-h) ** idx) / idx)
        total += term_scale * mom
        m += 1
        term_scale = term_scale * s / m
        # bound on every remaining term
        if abs(term_scale) * h ** m * qmax <= 1e-18 * max(1.0, abs(total)) or m > 400:
            break
    return total


def exp_transform(p: Polynomial, iv, s: complex) -> complex:
    """``int_l^u p(x) e^{s x} dx`` for complex ``s``."""
    iv = as_interval(iv)
    if s == 0:
        return complex(definite_integral(p, iv))
    c = iv.midpoint
    h = 0.5 * iv.width
    q = _shifted(p, c)
    if abs(s) * h <= _SERIES_SWITCH:
        core = _series(q, h, s)
    else:
        core = _by_parts(q, h, s)
    return complex(np.exp(s * c) * core)


def char_function(p: Polynomial, iv, t: float) -> complex:
    """``int_l^u p(x) e^{i t x} dx``."""
    return exp_transform(p, iv, 1j * float(t))


def mgf(p: Polynomial, iv, t: float) -> float:
    """``int_l^u e^{t x} p(x) dx``; equals the definite integral at ``t = 0``."""
    t = float(t)
    if t == 0.0:
        return definite_integral(p, iv)
    return float(exp_transform(p, iv, t).real)
