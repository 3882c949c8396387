"""The two benchmark problems on ``[-2, 2]**dim``."""

from __future__ import annotations

import numpy as np

from .exact import Test1Solution, Test2Solution, test1_classical
from .hamiltonian import ConfigurationError, NumericalHamiltonian
from .solver import Problem

PROBLEMS = ("test1", "test2")
SCHEMES = ("lax_friedrichs", "upwind", "upwind_nonincreasing", "upwind_nondecreasing")
DEFAULT_BOX = (-2.0, 2.0)

# Test 1 gradients satisfy |Du| <= 2 sqrt(f(t)) <= 2, so |dH/dp_k| = |p_k| <= 2.
TEST1_GRAD_BOUND = 2.0


def quadratic_h(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    return 0.5 * np.sum(p * p, axis=-1)


def norm_h(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(p * p, axis=-1))


def test1_u0(x: np.ndarray) -> np.ndarray:
    return np.minimum(0.0, np.sum(x * x, axis=-1) - 1.0)


def test2_u0(x: np.ndarray) -> np.ndarray:
    return -np.sum(x * x, axis=-1)


def _flavor(scheme: str) -> str:
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}; choose from {SCHEMES}")
    return "upwind_nonincreasing" if scheme == "upwind" else scheme


def exact_solution(problem_id: str, alpha: float, dim: int = 1):
    """Oracle ``u(t, x)`` for a benchmark, or ``None`` when none exists."""
    if problem_id == "test1":
        if alpha == 1.0:
            return test1_classical
        return Test1Solution.build(alpha, dim)
    if problem_id == "test2":
        return Test2Solution(alpha, dim)
    raise ConfigurationError(f"unknown problem {problem_id!r}")


def make_problem(
    problem_id: str,
    dim: int = 1,
    alpha: float = 1.0,
    scheme: str = "lax_friedrichs",
    theta: float | None = None,
    box: tuple[float, float] = DEFAULT_BOX,
    boundary_mode: str | None = None,
) -> Problem:
    """Test 1 freezes boundary ghosts at ``u0`` (the far field stays 0);
    Test 2 takes them from the exact solution."""
    flavor = _flavor(scheme)
    if problem_id == "test1":
        ham = NumericalHamiltonian(flavor, quadratic_h, TEST1_GRAD_BOUND, theta,
                                   grad_bound=TEST1_GRAD_BOUND)
        return Problem(dim, ham, test1_u0, tuple(box), boundary_mode or "dirichlet_frozen",
                       exact_solution("test1", alpha, dim), "test1")
    if problem_id == "test2":
        ham = NumericalHamiltonian(flavor, norm_h, 1.0, theta)
        return Problem(dim, ham, test2_u0, tuple(box), boundary_mode or "dirichlet_from_exact",
                       exact_solution("test2", alpha, dim), "test2")
    raise ConfigurationError(f"unknown problem {problem_id!r}; choose from {PROBLEMS}")


for _fn in (test1_u0, test2_u0):
    _fn.__test__ = False
