"""Quadrature and monotone inversion helpers."""

from __future__ import annotations

import logging
import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import _config

log = logging.getLogger(__name__)


def integrate(f, a, b, points=(), epsabs=None, epsrel=None):
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]``, split at ``points``."""
    epsabs = _config.QUAD_EPSABS if epsabs is None else epsabs
    epsrel = _config.QUAD_EPSREL if epsrel is None else epsrel
    cuts = np.unique(np.concatenate([[a], [p for p in points if a < p < b], [b]]))
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        if hi > lo:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", IntegrationWarning)
                v, err = quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=_config.QUAD_LIMIT)[:2]
            if caught:
                # endpoint log singularities stall the extrapolation long after
                # the value has settled; keep the estimate, note the error bound
                log.debug("quad on [%g, %g]: %s (error estimate %.1e)", lo, hi,
                          str(caught[0].message).split(".")[0], err)
            total += v
    return total


def bisect_quantile(cdf, density, lo, hi, q, xtol=None):
    """Leftmost ``x`` in ``[lo, hi]`` with ``cdf(x) >= q``, vectorised over ``q``.

    Bisection to ``xtol`` width, then one Newton polish kept only if it stays
    in the bracket and reduces the residual.
    """
    xtol = _config.QUANTILE_XTOL if xtol is None else xtol
    q = np.atleast_1d(np.asarray(q, dtype=float))
    a = np.full(q.shape, float(lo))
    b = np.full(q.shape, float(hi))
    width = float(hi) - float(lo)
    n_iter = int(np.ceil(np.log2(max(width, xtol) / xtol))) + 2
    for _ in range(n_iter):
        m = 0.5 * (a + b)
        below = cdf(m) < q
        a = np.where(below, m, a)
        b = np.where(below, b, m)
        if np.all(b - a <= xtol):
            break
    x = b
    fx = cdf(x) - q
    d = density(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = np.where(d > 0, x - fx / d, x)
    ok = (cand >= a) & (cand <= b)
    cand = np.where(ok, cand, x)
    better = np.abs(cdf(cand) - q) < np.abs(fx)
    return np.where(better, cand, x)
