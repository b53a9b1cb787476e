import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize
from scipy.optimize import nnls as scipy_nnls

from polypdf.exceptions import DegenerateError, DomainError, InfeasibleError
from polypdf.piecewise import (
    ControlPoints,
    PiecewisePdf,
    build,
    least_distance,
    min_norm_qp,
    nnls,
    smoothness_matrix,
    solve_first_segment,
    solve_next_segment,
)
from polypdf.polycore import Interval, Polynomial

TENT = ControlPoints([0, 0.5, 1], [0, 2, 0], ["min", "max", "min"])
FIVE = ControlPoints([0, 0.25, 0.5, 0.75, 1], [0, 1.8, 0.6, 1.5, 0],
                     ["min", "max", "min", "max", "min"])


class TestNNLS:
    def test_against_scipy(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            m, n = int(rng.integers(2, 12)), int(rng.integers(1, 8))
            A, b = rng.normal(size=(m, n)), rng.normal(size=m)
            x, r = nnls(A, b, max_iter=30 * n)
            xs, rs = scipy_nnls(A, b)
            assert np.all(x >= 0)
            assert r == pytest.approx(rs, abs=1e-9)
            if m >= n:
                assert np.allclose(x, xs, atol=1e-8)

    def test_least_distance(self):
        # min |z| with z1 + z2 >= 2 -> (1, 1)
        z = least_distance(np.array([[1.0, 1.0]]), np.array([2.0]))
        assert np.allclose(z, [1, 1])
        with pytest.raises(InfeasibleError):
            least_distance(np.array([[1.0], [-1.0]]), np.array([1.0, 1.0]))

    def test_min_norm_qp_against_slsqp(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            m = 5
            E = rng.normal(size=(2, m))
            f = rng.normal(size=2)
            G = rng.normal(size=(4, m))
            x0 = np.linalg.lstsq(E, f, rcond=None)[0] + 0.0
            h = G @ (x0 + rng.normal(size=m) * 0.5) - rng.uniform(0, 1, 4)  # feasible by design
            res = min_norm_qp(E, f, G, h)
            ref = minimize(lambda a: a @ a, x0, jac=lambda a: 2 * a, method="SLSQP",
                           constraints=[{"type": "eq", "fun": lambda a: E @ a - f},
                                        {"type": "ineq", "fun": lambda a: G @ a - h}],
                           options={"ftol": 1e-14, "maxiter": 500})
            assert res.x @ res.x <= ref.x @ ref.x + 1e-7
            assert res.eq_residual < 1e-10 and res.min_slack > -1e-9


class TestSmoothnessMatrix:
    def test_examples(self):
        assert np.allclose(smoothness_matrix(0, 2, 0), [[0, 0, 1]])
        assert np.allclose(smoothness_matrix(1, 1, 0), [[1, 1]])
        assert np.allclose(smoothness_matrix(1, 2, 1), [[1, 1, 1], [2, 1, 0]])

    def test_derivatives(self):
        p = Polynomial([0.3, -1.0, 2.0, 0.5])
        X = smoothness_matrix(0.7, 3, 2)
        vals = X @ p.coef[::-1]
        assert np.allclose(vals, [p(0.7), p.derivative()(0.7), p.derivative(2)(0.7)])

    def test_order_too_high(self):
        with pytest.raises(InfeasibleError):
            smoothness_matrix(0, 2, 2)


class TestControlPoints:
    def test_inferred_labels(self):
        assert ControlPoints([0, 1, 2], [0, 1, 0]).labels == ("min", "max", "min")

    def test_flat_segment_degenerate(self):
        with pytest.raises(DegenerateError):
            ControlPoints([0, 1], [1, 1], ["min", "max"])

    def test_non_alternating(self):
        with pytest.raises(DomainError):
            ControlPoints([0, 1, 2], [0, 1, 2], ["min", "min", "max"])


class TestSegments:
    def test_first_segment_cubic(self):
        cp = ControlPoints([0, 1], [0, 1], ["min", "max"])
        q = solve_first_segment(cp, 3, C=1, K=9)
        assert q(0.0) == pytest.approx(0, abs=1e-12) and q(1.0) == pytest.approx(1)
        assert np.all(np.diff(q(np.linspace(0, 1, 101))) > 0)
        assert np.allclose(q.coef, [0, 0, 3, -2], atol=1e-10)

    def test_first_segment_minimal_norm(self):
        # compare against SLSQP on the same program in local coordinates
        cp = ControlPoints([0, 1], [0, 1], ["min", "max"])
        n, K = 5, 9
        q = solve_first_segment(cp, n, C=1, K=K)
        b = q.compose(Polynomial([0.5, 0.5])).coef  # local t in (-1, 1)
        b = np.pad(b, (0, n + 1 - b.size))

        def row(k, t):
            return np.array([np.prod(range(i - k + 1, i + 1)) * t ** (i - k) if i >= k else 0.0
                             for i in range(n + 1)])

        E = np.array([row(0, -1), row(0, 1), row(1, -1), row(1, 1)])
        f = np.array([0, 1, 0, 0])
        t = np.linspace(-1, 1, K)[1:-1]
        G = np.array([row(0, s) for s in t] + [row(1, s) for s in t])
        h = np.full(G.shape[0], 1e-6)
        h[len(t):] *= 0.5
        ref = minimize(lambda a: a @ a, b + 0.01, jac=lambda a: 2 * a, method="SLSQP",
                       constraints=[{"type": "eq", "fun": lambda a: E @ a - f},
                                    {"type": "ineq", "fun": lambda a: G @ a - h}],
                       options={"ftol": 1e-15, "maxiter": 1000})
        assert b @ b <= ref.x @ ref.x + 1e-9
        # random feasible points are never shorter
        rng = np.random.default_rng(5)
        N = np.linalg.svd(E)[2][4:].T
        for _ in range(500):
            a = b + N @ rng.normal(scale=0.3, size=N.shape[1])
            if np.all(G @ a >= h):
                assert a @ a >= b @ b - 1e-9

    def test_degree_too_low(self):
        with pytest.raises(InfeasibleError):
            solve_first_segment(TENT, 2, C=1)

    def test_tent_mirror(self):
        q1 = solve_first_segment(TENT, 5, C=1)
        q2 = solve_next_segment(q1, 1, TENT, 5, C=1)
        x = np.linspace(0, 0.5, 21)
        # q2 is the negated density on the falling half
        assert np.allclose(q1(x), -q2(1 - x), atol=1e-6)

    def test_next_segment_continuity(self):
        q1 = solve_first_segment(FIVE, 5, C=1)
        q2 = solve_next_segment(q1, 1, FIVE, 5, C=1)
        x = FIVE.x[1]
        assert q1(x) + q2(x) == pytest.approx(0, abs=1e-9)
        assert q1.derivative()(x) + q2.derivative()(x) == pytest.approx(0, abs=1e-7)

    def test_c0_allows_slope_jump(self):
        pp = build(FIVE, n=4, C=0)
        assert pp.continuity_defects().max() < 1e-12


class TestBuild:
    def test_tent(self):
        pp = build(TENT, n=5, C=1)
        assert pp.mass == pytest.approx(1.0, abs=1e-12)
        x = np.linspace(0, 1, 2001)
        assert x[np.argmax(pp.pdf(x))] == pytest.approx(0.5, abs=1e-3)
        assert np.allclose(pp.pdf(x), pp.pdf(1 - x), atol=1e-9)
        assert pp.cdf(0.5) == pytest.approx(0.5) and pp.cdf(1.0) == pytest.approx(1.0)
        assert quad(pp.pdf, 0, 1, points=[0.5])[0] == pytest.approx(1.0)

    def test_knot_values_scale_with_mass(self):
        q1 = solve_first_segment(TENT, 5, C=1)
        raw_mass = 2 * q1.integrate((0, 0.5))  # symmetric tent
        pp = build(TENT, n=5, C=1)
        assert pp.pdf(0.5) == pytest.approx(2.0 / raw_mass, rel=1e-9)
        assert pp.pdf(0.0) == pytest.approx(0.0, abs=1e-12)

    def test_two_points(self):
        cp = ControlPoints([0, 2], [0, 1], ["min", "max"])
        pp = build(cp, n=4, C=1)
        q = solve_first_segment(cp, 4, C=1)
        x = np.linspace(0, 2, 9)
        assert np.allclose(pp.pdf(x), q(x) / q.integrate((0, 2)), atol=1e-9)

    def test_bimodal(self):
        pp = build(FIVE)
        x = np.linspace(0, 1, 4001)
        v = pp.pdf(x)
        peaks = x[1:-1][(v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])]
        assert np.allclose(peaks, [0.25, 0.75], atol=1e-3)

    @pytest.mark.parametrize("C", [0, 1, 2])
    def test_invariants(self, C):
        pp = build(FIVE, C=C)
        assert pp.verify()
        assert all(r.nonnegative for r in pp.certify_segments())
        assert pp.continuity_defects().max() <= 1e-6

    def test_segments_tile(self):
        pp = build(FIVE)
        assert pp.intervals[0].lower == 0 and pp.intervals[-1].upper == 1
        for a, b in zip(pp.intervals, pp.intervals[1:]):
            assert a.upper == b.lower

    def test_quantile_cdf(self):
        pp = build(FIVE)
        q = np.linspace(0.01, 0.99, 33)
        assert np.allclose(pp.cdf(pp.quantile(q)), q, atol=1e-10)

    def test_moments_against_quadrature(self):
        pp = build(FIVE)
        m = quad(lambda x: x * pp.pdf(x), 0, 1, points=FIVE.x[1:-1])[0]
        v = quad(lambda x: (x - m) ** 2 * pp.pdf(x), 0, 1, points=FIVE.x[1:-1])[0]
        assert pp.mean() == pytest.approx(m, abs=1e-12)
        assert pp.variance() == pytest.approx(v, abs=1e-12)


def test_piecewise_requires_tiling():
    with pytest.raises(DomainError):
        PiecewisePdf([(Polynomial([1]), Interval(0, 1)), (Polynomial([1]), Interval(1.5, 2))])
