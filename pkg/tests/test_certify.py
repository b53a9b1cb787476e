import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polypdf.certify import (
    Method,
    Verdict,
    certify_nonneg_sturm,
    classify_roots_theorem1,
    minimum_on,
    numeric_negativity_report,
    numeric_negativity_tests,
)
from polypdf.exceptions import DomainError
from polypdf.polycore import FactoredPolynomial, Polynomial, form2_to_form1

NN, NEG, IND = Verdict.NON_NEGATIVE, Verdict.HAS_NEGATIVE, Verdict.INDETERMINATE


class TestSturm:
    def test_examples(self):
        assert certify_nonneg_sturm(Polynomial([0, 2]), (0, 1)).verdict is NN
        rep = certify_nonneg_sturm(Polynomial([-0.5, 1]), (0, 1))
        assert rep.verdict is NEG and rep.method is Method.STURM_EXACT
        assert all(0 < w < 0.5 for w in rep.witnesses)
        assert certify_nonneg_sturm(Polynomial([4, -4, 1]), (0, 1)).verdict is NN

    def test_double_root_inside_is_nonnegative(self):
        # (x - 1/2)^2 is exactly representable
        assert certify_nonneg_sturm(Polynomial([0.25, -1, 1]), (0, 1)).verdict is NN

    def test_tiny_dip_caught_without_tolerance(self):
        p = Polynomial([0.25 - 1e-14, -1, 1])
        assert certify_nonneg_sturm(p, (0, 1)).verdict is NEG
        assert certify_nonneg_sturm(p, (0, 1), atol=1e-12).verdict is NN

    def test_negative_constant(self):
        assert certify_nonneg_sturm(Polynomial([-1]), (0, 1)).verdict is NEG

    def test_endpoint_zero_allowed(self):
        assert certify_nonneg_sturm(Polynomial([0, 6, -6]), (0, 1)).verdict is NN

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=7))
    def test_witnesses_are_negative(self, c):
        p = Polynomial(c)
        if p.is_zero():
            with pytest.raises(DomainError):
                certify_nonneg_sturm(p, (-1, 1))
            return
        rep = certify_nonneg_sturm(p, (-1, 1))
        for w in rep.witnesses:
            assert -1 <= w <= 1 and p(w) <= 0
        if rep.verdict is NN:
            assert np.min(p(np.linspace(-1, 1, 2001))) >= -1e-9 * max(1, np.abs(c).max())


class TestTheorem1:
    def test_examples(self):
        assert classify_roots_theorem1(FactoredPolynomial(1, [2, 3]), (0, 1)).verdict is NN
        rep = classify_roots_theorem1(FactoredPolynomial(1, [2]), (0, 1))
        assert rep.verdict is NEG and rep.method is Method.THEOREM1
        assert classify_roots_theorem1(FactoredPolynomial(1, [0.5, 0.5]), (0, 1)).verdict is NN

    def test_roots_left_of_support(self):
        assert classify_roots_theorem1(FactoredPolynomial(1, [-2]), (0, 1)).verdict is NN

    def test_complex_pair(self):
        assert classify_roots_theorem1(FactoredPolynomial(1, [0.5 + 1j, 0.5 - 1j]), (0, 1)).verdict is NN

    def test_root_inside_pair_right(self):
        # two odd roots above l, one inside -> negative between them
        rep = classify_roots_theorem1(FactoredPolynomial(1, [0.5, 2]), (0, 1))
        assert rep.verdict is NEG
        assert form2_to_form1(FactoredPolynomial(1, [0.5, 2]))(rep.witnesses[0]) < 0

    def test_root_on_endpoint_is_indeterminate(self):
        f = FactoredPolynomial(1, [0.0, -1.0])
        assert classify_roots_theorem1(f, (0, 1)).verdict is IND
        assert classify_roots_theorem1(f, (0, 1), fallback=True).verdict is NN

    def test_negative_leading(self):
        # 2 - x
        assert classify_roots_theorem1(FactoredPolynomial(-1, [2]), (0, 1)).verdict is NN
        # -(x + 1)
        rep = classify_roots_theorem1(FactoredPolynomial(-1, [-1]), (0, 1))
        assert rep.verdict is NEG and -(rep.witnesses[0] + 1) < 0
        # -(x - 0.5)(x - 2) changes sign inside
        assert classify_roots_theorem1(FactoredPolynomial(-1, [0.5, 2]), (0, 1)).verdict is NEG
        # -(x + 1)(x - 2) >= 0 on (0, 1)
        assert classify_roots_theorem1(FactoredPolynomial(-1, [-1, 2]), (0, 1)).verdict is NN
        with pytest.raises(DomainError):
            classify_roots_theorem1(FactoredPolynomial(0, [2]), (0, 1))

    def test_negative_leading_agrees_with_sturm(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            deg = int(rng.integers(1, 7))
            roots = rng.uniform(-2, 3, deg)
            f = FactoredPolynomial(-float(rng.uniform(0.5, 2)), roots)
            rep = classify_roots_theorem1(f, (0, 1))
            if rep.verdict is IND:
                continue
            assert rep.verdict is certify_nonneg_sturm(form2_to_form1(f), (0, 1)).verdict


class TestNumeric:
    def test_examples(self):
        assert numeric_negativity_tests(Polynomial([0, 2]), (0, 1)) == pytest.approx((0, 0), abs=1e-14)
        i1, i2 = numeric_negativity_tests(Polynomial([-0.5, 1]), (0, 1))
        assert i1 > 0 and i2 == pytest.approx(-0.25, abs=1e-12)
        assert numeric_negativity_tests(Polynomial([1]), (0, 1)) == (0, 0)

    def test_report(self):
        assert numeric_negativity_report(Polynomial([0, 2]), (0, 1)).verdict is NN
        rep = numeric_negativity_report(Polynomial([-0.5, 1]), (0, 1))
        assert rep.verdict is NEG and rep.witnesses[0] < 0.5

    def test_tiny_dip_is_indeterminate(self):
        # negative mass far below the quadrature tolerance
        rep = numeric_negativity_report(Polynomial([0.25 - 1e-14, -1, 1]), (0, 1))
        assert rep.verdict in (IND, NN)


def test_minimum_on():
    x, v = minimum_on(Polynomial([0.25, -1, 1]), (0, 1))
    assert x == pytest.approx(0.5) and v == pytest.approx(0.0, abs=1e-15)
    x, v = minimum_on(Polynomial([0, 2]), (0, 1))
    assert x == 0 and v == 0
