import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from polypdf.distribution import (
    Certificate,
    PolynomialPdf,
    _bivariate_conv,
    _integrate_x,
    convolve,
    entropy,
    extrema,
    kl_divergence,
    make_pdf,
    mass_tolerance,
    mixture,
    posterior_product,
    uniform,
)
from polypdf.exceptions import DegenerateError, DomainError, MassError, NegativityError
from polypdf.polycore import Polynomial

U = uniform(0.0, 1.0)
TWO_X = make_pdf(Polynomial([0, 1]), (0, 1))
PARAB = make_pdf(Polynomial([0, 1, -1]), (0, 1))


def quad_oracle(f, a, b):
    return quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


class TestConstruction:
    def test_make_pdf(self):
        assert np.allclose(TWO_X.poly.coef, [0, 2])
        assert np.allclose(PARAB.poly.coef, [0, 6, -6])
        with pytest.raises(NegativityError) as ei:
            make_pdf(Polynomial([-0.5, 1]), (0, 1))
        assert ei.value.to_dict()["kind"] == "negativity"

    def test_zero_rejected(self):
        with pytest.raises(DegenerateError):
            make_pdf(Polynomial([0]), (0, 1))

    def test_direct_construction_checks_mass(self):
        with pytest.raises(MassError):
            PolynomialPdf(Polynomial([0, 1]), (0, 1))

    def test_certificate_default(self):
        assert TWO_X.certificate is Certificate.CERTIFIED_NONNEGATIVE

    def test_mass_tolerance_floor(self):
        assert mass_tolerance(Polynomial([1.0]), (0, 1)) == pytest.approx(1e-10, rel=1e-3)


class TestCdfQuantile:
    def test_cdf_examples(self):
        assert TWO_X.cdf(0.5) == pytest.approx(0.25)
        assert PARAB.cdf(1.0) == 1.0 and TWO_X.cdf(1.0) == 1.0
        assert PARAB.cdf(0.5) == pytest.approx(0.5)
        assert TWO_X.cdf(0.0) == 0.0

    def test_cdf_outside_support(self):
        with pytest.raises(DomainError):
            TWO_X.cdf(1.5)

    def test_quantile_examples(self):
        assert TWO_X.quantile(0.25) == pytest.approx(0.5)
        assert U.quantile(0.3) == pytest.approx(0.3)
        assert PARAB.quantile(0.5) == pytest.approx(0.5)
        with pytest.raises(DomainError):
            U.quantile(1.0)

    def test_vectorised(self):
        q = np.array([0.1, 0.5, 0.9])
        assert np.allclose(TWO_X.quantile(q), np.sqrt(q))

    def test_quantile_at_density_zero(self):
        # F(x) = 1/2 + 4 (x - 1/2)^3 is flat to rounding within ~1e-5 of 1/2
        d = make_pdf(Polynomial([0.25, -1, 1]), (0, 1))
        x = d.quantile(0.5)
        assert abs(x - 0.5) < 1e-5
        assert d.cdf(x) == pytest.approx(0.5, abs=1e-14)


class TestMoments:
    def test_examples(self):
        assert U.moment(1) == 0.5 and PARAB.moment(1) == pytest.approx(0.5)
        assert PARAB.variance() == pytest.approx(0.05)
        assert U.moment(0) == pytest.approx(1.0)

    def test_against_quadrature(self):
        d = make_pdf(Polynomial([0.2, -0.3, 1.0, 0.4]), (-1, 2))
        for k in range(5):
            oracle = quad_oracle(lambda x: x ** k * d.pdf(x), -1, 2)
            assert d.moment(k) == pytest.approx(oracle, rel=1e-12, abs=1e-14)
        m = d.mean()
        assert d.variance() == pytest.approx(quad_oracle(lambda x: (x - m) ** 2 * d.pdf(x), -1, 2))


class TestEntropyKL:
    def test_entropy(self):
        assert entropy(U) == pytest.approx(0.0, abs=1e-14)
        assert uniform(0, 2).entropy() == pytest.approx(math.log(2))
        assert TWO_X.entropy() == pytest.approx(0.5 - math.log(2), abs=1e-12)

    def test_kl(self):
        assert kl_divergence(PARAB, PARAB) == pytest.approx(0.0, abs=1e-12)
        assert kl_divergence(U, TWO_X) == pytest.approx(1 - math.log(2), abs=1e-10)
        assert kl_divergence(TWO_X, U) == pytest.approx(math.log(2) - 0.5, abs=1e-10)

    def test_kl_support_mismatch(self):
        with pytest.raises(DomainError):
            kl_divergence(U, uniform(0, 2))

    def test_kl_with_interior_zero_of_q(self):
        # q vanishes at 1/2 only quadratically: log singularity is integrable
        # q = 12 (x - 1/2)^2; KL(u, q) = -ln 12 - 2 int ln|x - 1/2| = 2 - ln 3
        q = make_pdf(Polynomial([0.25, -1, 1]), (0, 1))
        assert kl_divergence(U, q) == pytest.approx(2 - math.log(3), rel=1e-8)


def tri(z):
    return np.where(z <= 1, z, 2 - z)


class TestConvolution:
    def test_triangle(self):
        c = convolve(U, U)
        assert c.pdf(1.0) == pytest.approx(1.0) and c.pdf(0.5) == pytest.approx(0.5)
        assert c.mass == pytest.approx(1.0, abs=1e-12)

    def test_against_direct_quadrature(self):
        p, q = TWO_X, PARAB
        c = convolve(p, q)
        for z in (0.1, 0.7, 1.0, 1.3, 1.9):
            lo, hi = max(0, z - 1), min(1, z)
            oracle = quad_oracle(lambda x: p.pdf(x) * q.pdf(z - x), lo, hi)
            assert c.pdf(z) == pytest.approx(oracle, abs=1e-12)

    def test_fixed_limits_disagree_with_oracle(self):
        # integrating over the whole support for every z ignores that q(z - x)
        # vanishes outside it; the z-dependent limits are required
        H = _bivariate_conv(U.poly, U.poly)
        literal = _integrate_x(H, Polynomial([0.0]), Polynomial([1.0]))
        assert abs(literal(0.5) - 0.5) > 0.1

    def test_additivity(self):
        d1 = make_pdf(Polynomial([1.0, 0.5, 0.3]), (-1, 1))
        d2 = make_pdf(Polynomial([0.2, 0.0, 1.0]), (-1, 1))
        c = convolve(d1, d2)
        assert c.mean() == pytest.approx(d1.mean() + d2.mean(), abs=1e-12)
        assert c.variance() == pytest.approx(d1.variance() + d2.variance(), abs=1e-12)


class TestCombinations:
    def test_posterior(self):
        a = make_pdf(Polynomial([2, -2]), (0, 1))
        assert np.allclose(posterior_product(TWO_X, a).poly.coef, [0, 6, -6])
        assert np.allclose(posterior_product(U, PARAB).poly.coef, PARAB.poly.coef)
        assert np.allclose(posterior_product(TWO_X, TWO_X).poly.coef, [0, 0, 3])

    def test_mixture(self):
        assert np.allclose(mixture([U, U], [0.5, 0.5]).poly.coef, [1])
        a = make_pdf(Polynomial([2, -2]), (0, 1))
        assert mixture([TWO_X, a], [0.5, 0.5]).poly == Polynomial([1.0])
        with pytest.raises(DomainError):
            mixture([U, TWO_X], [0.7, 0.4])


class TestExtrema:
    def test_parabola(self):
        ex = extrema(PARAB)
        interior = [e for e in ex if not e.boundary]
        assert len(interior) == 1 and interior[0].kind == "max"
        assert interior[0].x == pytest.approx(0.5)

    def test_two_x(self):
        ex = extrema(TWO_X)
        assert not any(not e.boundary for e in ex)
        assert ex[-1].x == 1 and ex[-1].kind == "max"
        assert ex[0].x == 0 and ex[0].kind == "min"

    def test_uniform(self):
        assert [e.boundary for e in extrema(U)] == [True, True]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=3),
       st.floats(0.05, 2.0))
def test_quantile_inverts_cdf(s, c):
    sq = Polynomial(s)
    d = make_pdf(sq * sq + Polynomial([c]), (-1, 1))
    q = np.linspace(0.01, 0.99, 25)
    assert np.max(np.abs(d.cdf(d.quantile(q)) - q)) < 1e-9
