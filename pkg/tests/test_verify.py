from dataclasses import replace

import numpy as np
import pytest

from caputo_hj.caputo import weights
from caputo_hj.grid import GridSpec
from caputo_hj.hamiltonian import NumericalHamiltonian, suggest_dt
from caputo_hj.problems import make_problem
from caputo_hj.solver import CflViolationError, Problem, _prepare, apply_scheme
from caputo_hj.verify import PROPERTIES, random_history, verify_g_properties


def periodic_map(pid, alpha, h=0.1):
    prob = replace(make_problem(pid, alpha=alpha), boundary_mode="periodic", exact=None)
    dt = suggest_dt("lax_friedrichs", alpha, h, prob.hamiltonian.lipschitz_bound)
    prob, _ = _prepare(prob, alpha, dt, h, False)
    spec = GridSpec.from_box(1, prob.box, h, "periodic")
    w = weights(alpha, 5, dt)
    return lambda U: apply_scheme(U, prob, spec, w)[0], spec


class TestMapProperties:
    def test_constant_shift(self, rng):
        G, spec = periodic_map("test2", 0.7)
        U = random_history(rng, spec, 6, 0.25)
        assert np.max(np.abs(G(U + 3.7) - G(U) - 3.7)) <= 1e-13

    def test_nonexpansive_at_half(self, rng):
        G, spec = periodic_map("test1", 0.5)
        U = random_history(rng, spec, 6, 0.5)
        V = U + rng.uniform(-0.5, 0.5, U.shape)
        V[2, 3] = U[2, 3] + 0.5
        assert np.max(np.abs(U - V)) == pytest.approx(0.5)
        assert np.max(np.abs(G(U) - G(V))) <= 0.5 + 1e-13

    def test_ordered(self, rng):
        G, spec = periodic_map("test1", 0.8)
        U = random_history(rng, spec, 6, 0.5)
        V = U + rng.uniform(0, 0.2, U.shape)
        assert np.all(G(V) - G(U) >= -1e-13)


class TestVerify:
    @pytest.mark.parametrize("pid", ["test1", "test2"])
    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_all_pass_under_cfl(self, pid, alpha):
        prob = make_problem(pid, alpha=alpha)
        L = prob.hamiltonian.lipschitz_bound
        rep = verify_g_properties(prob, alpha, suggest_dt("lax_friedrichs", alpha, 0.1, L), 0.1, trials=40)
        assert rep.cfl_satisfied and rep.passed
        assert set(rep.results) == set(PROPERTIES)
        assert rep.results["gradient_bound"].skipped
        assert rep.results["monotone"].trials == 40

    def test_two_dimensional(self):
        prob = make_problem("test1", dim=2, alpha=0.8)
        rep = verify_g_properties(prob, 0.8, suggest_dt("lax_friedrichs", 0.8, 0.2, 2.0, dim=2), 0.2,
                                  trials=10)
        assert rep.passed

    def test_violation_needs_override(self):
        prob = make_problem("test2", alpha=0.5)
        dt = 50 * suggest_dt("lax_friedrichs", 0.5, 0.1, 1.0)
        with pytest.raises(CflViolationError):
            verify_g_properties(prob, 0.5, dt, 0.1, trials=5)
        rep = verify_g_properties(prob, 0.5, dt, 0.1, trials=50, allow_unstable=True)
        assert not rep.cfl_satisfied
        assert rep.results["monotone"].failures > 0
        assert not rep.passed

    def test_x_dependent_gradient_bound(self):
        H = lambda x, p: (1 + 0.5 * np.sin(x[..., 0])) * np.abs(p[..., 0])
        ham = NumericalHamiltonian("lax_friedrichs", H, 1.5, spatial_lipschitz=0.5)
        prob = Problem(1, ham, lambda x: np.cos(x[..., 0]), (-2.0, 2.0), "periodic")
        rep = verify_g_properties(prob, 0.6, suggest_dt("lax_friedrichs", 0.6, 0.1, 1.5), 0.1, trials=30)
        assert rep.results["gradient_bound"].skipped is None
        assert rep.results["gradient_bound"].trials == 30
        assert rep.passed

    def test_report_serialisable(self):
        prob = make_problem("test2", alpha=0.5)
        rep = verify_g_properties(prob, 0.5, 1e-3, 0.1, trials=3)
        d = rep.as_dict()
        assert d["passed"] and len(d["results"]) == len(PROPERTIES)

    def test_seeded(self):
        prob = make_problem("test1", alpha=0.5)
        a = verify_g_properties(prob, 0.5, 1e-3, 0.1, trials=5, seed=3).as_dict()
        b = verify_g_properties(prob, 0.5, 1e-3, 0.1, trials=5, seed=3).as_dict()
        assert a == b
