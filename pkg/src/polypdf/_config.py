"""Numerical tolerances shared across the package.

Every constant is a plain module attribute so callers can monkeypatch or
read them; functions take explicit keyword overrides where it matters.
"""

# coefficient trimming: |a_i| below this times max|a| is treated as zero
TRIM_RTOL = 1e-14

# conjugate pairing of complex roots in a real factored polynomial
CONJUGATE_TOL = 1e-12

# Form II -> Form I: imaginary residue allowed in expanded coefficients
IMAG_RESIDUE_TOL = 1e-10

# Form III: minimum separation between poles
POLE_SEPARATION_TOL = 1e-12

# numeric root residual: |p(r)| <= ROOT_RESIDUAL_RTOL * max|a| * max(1,|r|)^n
ROOT_RESIDUAL_RTOL = 1e-8
ROOT_MAX_ITER = 500

# Sturm endpoint displacement, relative to the interval width
STURM_ENDPOINT_SHIFT = 1e-12

# unit-mass tolerance for validated densities; grows with the rounding bound
# of the coefficient-form area but never past MASS_TOL_MAX
MASS_TOL = 1e-10
MASS_TOL_MAX = 1e-6

# allowed negative excursion of a validated density (scaled by max(1, sup|p|))
NONNEG_ATOL = 1e-12

# quadrature
QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 400
LOG_CLAMP = 1e-300

# numeric negativity integrals
NEGATIVITY_TOL = 1e-9

# quantile search
QUANTILE_XTOL = 1e-12
QUANTILE_FTOL = 1e-10

# conditioning limit for Vandermonde-type systems
COND_LIMIT = 1e12

# piecewise construction
PIECEWISE_MARGIN = 1e-6
PIECEWISE_DEFAULT_K = 25
PIECEWISE_DEFAULT_C = 1

# sampling
DEFAULT_GRID = 1024
ENVELOPE_MARGIN = 1e-9
