"""Explicit monotone schemes for Hamilton-Jacobi equations with a Caputo time derivative."""

__version__ = "0.1.0"

from .caputo import CaputoWeights, WeightSequence, caputo_apply, rho, weights  # noqa: E402
from .exact import Test1Solution, Test2Solution, critical_time, f_coefficients  # noqa: E402
from .grid import GridFunction, GridSpec, discrete_gradient, forward_diff, sup_norm  # noqa: E402
from .hamiltonian import (  # noqa: E402
    CflInfeasibleError,
    CflReport,
    ConfigurationError,
    NumericalHamiltonian,
    cfl_check,
    suggest_dt,
)
from .numerics import DomainError, PowerSeries, gamma, radius_estimate, series_eval  # noqa: E402
from .problems import make_problem  # noqa: E402
from .solver import (  # noqa: E402
    CflViolationError,
    NumericalFailureError,
    Problem,
    Solution,
    classical_solve,
    solve,
    step,
)

__all__ = [
    "CaputoWeights",
    "CflInfeasibleError",
    "CflReport",
    "CflViolationError",
    "ConfigurationError",
    "DomainError",
    "GridFunction",
    "GridSpec",
    "NumericalFailureError",
    "NumericalHamiltonian",
    "PowerSeries",
    "Problem",
    "Solution",
    "Test1Solution",
    "Test2Solution",
    "WeightSequence",
    "caputo_apply",
    "cfl_check",
    "classical_solve",
    "critical_time",
    "discrete_gradient",
    "f_coefficients",
    "forward_diff",
    "gamma",
    "make_problem",
    "radius_estimate",
    "rho",
    "series_eval",
    "solve",
    "step",
    "suggest_dt",
    "sup_norm",
    "weights",
]
