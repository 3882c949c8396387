import math

import numpy as np
import pytest

from caputo_hj.caputo import caputo_of_samples
from caputo_hj.exact import (
    BeyondCriticalTimeError,
    Test1Solution,
    Test2Solution,
    critical_time,
    f_coefficients,
    test1_classical,
    test1_eval,
    test1_residual,
    test2_eval,
)
from caputo_hj.numerics import series_eval
from caputo_hj.problems import test1_u0


@pytest.fixture(scope="module")
def sol08():
    return Test1Solution.build(0.8)


class TestCoefficients:
    def test_alpha_one_geometric(self):
        f = f_coefficients(1.0, 400)
        assert all(f.coefficient(n) == (-2.0) ** n for n in range(21))

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8, 1.0])
    def test_first_two_closed_forms(self, alpha):
        f = f_coefficients(alpha, 10)
        assert f.coefficient(0) == 1.0
        assert f.coefficient(1) == pytest.approx(-2 / math.gamma(alpha + 1), abs=1e-13)
        assert f.coefficient(2) == pytest.approx(8 / math.gamma(2 * alpha + 1), abs=1e-13)

    def test_third_coefficient(self):
        a = 0.6
        f = f_coefficients(a, 5)
        f1, f2 = f.coefficient(1), f.coefficient(2)
        f3 = -2 * (f1**2 + 2 * f2) * math.gamma(2 * a + 1) / math.gamma(3 * a + 1)
        assert f.coefficient(3) == pytest.approx(f3, rel=1e-13)

    def test_deterministic(self):
        assert f_coefficients(0.7, 400) == f_coefficients(0.7, 400)

    @pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3])
    def test_small_alpha_representable(self, alpha):
        f = f_coefficients(alpha, 400)
        assert all(map(math.isfinite, f.coefficients)) and f.scale > 1


class TestCriticalTime:
    def test_alpha_one(self):
        assert critical_time(1.0) == pytest.approx(0.5, rel=0.02)

    def test_positive_and_increasing(self):
        ts = [critical_time(a) for a in (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)]
        assert all(0 < t < math.inf for t in ts)
        assert all(a < b for a, b in zip(ts, ts[1:]))

    def test_needs_enough_terms(self):
        with pytest.raises(ValueError):
            critical_time(0.5, 60)


class TestTest1:
    def test_initial_datum(self, sol08):
        x = np.linspace(-2, 2, 41)[:, None]
        assert np.array_equal(test1_eval(sol08, 0.0, x), test1_u0(x))

    def test_alpha_one_value(self):
        s = Test1Solution.build(1.0)
        assert test1_eval(s, 0.2, [1.0]) == pytest.approx(-2 / 7, abs=1e-12)

    def test_origin_stays_at_minus_one(self, sol08):
        assert test1_eval(sol08, 0.2, [0.0]) == -1.0

    def test_alpha_one_series_matches_closed_form(self):
        s = Test1Solution.build(1.0)
        rng = np.random.default_rng(5)
        x = rng.uniform(-2, 2, (200, 2))
        for t in np.linspace(0, 0.45, 10):
            assert np.max(np.abs(s(t, x) - test1_classical(t, x))) <= 1e-8

    def test_refuses_beyond_cutoff(self, sol08):
        with pytest.raises(BeyondCriticalTimeError):
            sol08(0.96 * sol08.critical_time, [0.0])
        with pytest.raises(ValueError):
            sol08.f_value(-1.0)
        sol08(0.94 * sol08.critical_time, [0.0])

    @pytest.mark.parametrize("alpha", [0.5, 0.8, 0.9, 1.0])
    def test_residual_small_time(self, alpha):
        assert test1_residual(Test1Solution.build(alpha), 0.01) <= 1e-10

    @pytest.mark.parametrize("alpha", [0.1, 0.2, 0.3])
    def test_small_time_outside_range_for_small_alpha(self, alpha):
        # T_alpha < 0.01 here, so the oracle refuses rather than answer
        with pytest.raises(BeyondCriticalTimeError):
            test1_residual(Test1Solution.build(alpha), 0.01)

    def test_residual_alpha_one_200_terms(self):
        assert test1_residual(Test1Solution.build(1.0, n_terms=200), 0.1) <= 1e-10

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0])
    def test_residual_vanishes_at_zero(self, alpha):
        s = Test1Solution.build(alpha)
        assert s.residual(0.0) == 0.0
        assert s.residual(1e-9 * s.critical_time) <= 1e-12

    @pytest.mark.parametrize("alpha", [round(0.1 * k, 1) for k in range(1, 11)])
    def test_residual_at_half_critical_time(self, alpha):
        s = Test1Solution.build(alpha)
        assert s.residual(0.5 * s.critical_time) <= 1e-8

    @pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.8])
    def test_residual_shrinks_with_terms(self, alpha):
        full = Test1Solution.build(alpha)
        t = 0.5 * full.critical_time
        r = [Test1Solution(alpha, f_coefficients(alpha, n), full.critical_time).residual(t)
             for n in (25, 50)]
        assert r[1] <= r[0] / 10

    def test_memory_breaks_formula_in_annulus(self, sol08):
        # Points with 1 < |x| < 1/sqrt(f(t)) were at u = 0 earlier, so the
        # Caputo memory of u differs from |x|^2 times that of f there: the
        # formula is a solution inside the unit ball and outside the annulus only.
        dt = 1e-4
        ts = dt * np.arange(2001)
        f = sol08.f_value(0.2)

        def pde_residual(x):
            u = np.array([sol08(t, [x]) for t in ts])
            du = 2 * x * f if u[-1] < 0 else 0.0
            return caputo_of_samples(0.8, dt, u) + 0.5 * du * du

        assert abs(pde_residual(0.5)) <= 1e-4
        assert abs(pde_residual(0.9)) <= 1e-4
        assert pde_residual(1.1) > 0.1


class TestTest2:
    def test_initial_datum(self):
        x = np.linspace(-2, 2, 9)[:, None]
        assert np.array_equal(test2_eval(Test2Solution(0.3), 0.0, x), -x[:, 0] ** 2)

    def test_alpha_one_identity(self):
        rng = np.random.default_rng(11)
        s = Test2Solution(1.0, dim=2)
        for _ in range(1000):
            t = rng.uniform(0, 2)
            x = rng.uniform(-3, 3, 2)
            assert s(t, x) == pytest.approx(-(np.linalg.norm(x) + t) ** 2, abs=1e-12)

    def test_half_order_closed_form(self):
        s = Test2Solution(0.5)
        assert s(0.04, [0.0]) == pytest.approx(-0.08, abs=1e-15)
        x, t = 0.7, 0.3
        closed = -x * x - 2 * t - 4 / math.sqrt(math.pi) * x * math.sqrt(t)
        assert s(t, [x]) == pytest.approx(closed, abs=1e-14)

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
    def test_satisfies_pde_discretely(self, alpha):
        s = Test2Solution(alpha)
        dt, x = 1e-4, [0.7]
        u = [s(t, x) for t in dt * np.arange(2001)]
        assert abs(caputo_of_samples(alpha, dt, u) + s.grad_norm(0.2, x)) <= 5e-3

    def test_domain(self):
        with pytest.raises(ValueError):
            Test2Solution(1.5)
        with pytest.raises(ValueError):
            Test2Solution(0.5)(-0.1, [0.0])


def test_series_eval_agrees_with_f_value(sol08):
    assert sol08.f_value(0.1) == series_eval(sol08.f, 0.1)
