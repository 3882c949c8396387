"""Explicit time marching for the time-fractional Hamilton-Jacobi equation.

One step maps the history ``U^0 .. U^n`` to::

    U^{n+1} = sum_m c_m^{n+1} U^m - rho * g(x, [D_h U^n])

Every step also checks the a-priori sup-norm growth bound that holds for
monotone schemes, and watches the realised discrete gradients against the
range used to justify the Lipschitz constant in the CFL condition.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .caputo import CaputoWeights, WeightSequence, check_alpha
from .grid import BoundaryMode, GhostProvider, GridFunction, GridSpec, gradient_from_values
from .hamiltonian import (
    CflInfeasibleError,
    CflReport,
    ConfigurationError,
    NumericalHamiltonian,
    cfl_check,
    default_theta,
)
from .numerics import gamma

__all__ = [
    "CflViolationError",
    "GradientRangeWarning",
    "History",
    "NumericalFailureError",
    "Problem",
    "Solution",
    "StepReport",
    "classical_solve",
    "solve",
    "stability_bound",
    "step",
]

# Weighted history sums switch to extended-precision accumulation past this level.
EXTENDED_SUM_LEVEL = 1000


class CflViolationError(ValueError):
    pass


class NumericalFailureError(ArithmeticError):
    pass


class GradientRangeWarning(UserWarning):
    """Discrete gradients left the range that justifies the Lipschitz bound."""


@dataclass(frozen=True)
class Problem:
    """Equation data on a box ``[a, b]**dim``.

    ``u0(points)`` and ``exact(t, points)`` take coordinates with the spatial
    components on the last axis.
    """

    dim: int
    hamiltonian: NumericalHamiltonian
    u0: Callable[[np.ndarray], np.ndarray]
    box: tuple[float, float] = (-2.0, 2.0)
    boundary_mode: BoundaryMode = "dirichlet_frozen"
    exact: Callable[[float, np.ndarray], np.ndarray] | None = None
    name: str = "problem"

    def __post_init__(self) -> None:
        if self.boundary_mode == "dirichlet_from_exact" and self.exact is None:
            raise ConfigurationError("dirichlet_from_exact needs an exact solution")

    def grid(self, h: float) -> GridSpec:
        return GridSpec.from_box(self.dim, self.box, h, self.boundary_mode)

    def ghost(self, t: float) -> GhostProvider | None:
        if self.boundary_mode == "periodic":
            return None
        if self.boundary_mode == "dirichlet_from_exact":
            return lambda pts: self.exact(t, pts)
        return self.u0


class History:
    """Append-only sequence of levels ``U^0 .. U^n`` on one grid."""

    def __init__(self, u0: GridFunction, dt: float, alpha: float, capacity: int = 16):
        self.spec = u0.spec
        self.dt = float(dt)
        self.alpha = check_alpha(alpha)
        self._data = np.empty((max(capacity, 1), u0.spec.size))
        self._data[0] = u0.values.reshape(-1)
        self._len = 1
        self.flux_sup = 0.0  # running sup of |g| over processed levels

    def __len__(self) -> int:
        return self._len

    @property
    def n(self) -> int:
        """Index of the newest level."""
        return self._len - 1

    def append(self, u: GridFunction) -> None:
        if u.spec != self.spec:
            raise ValueError("all levels must share one grid")
        if self._len == self._data.shape[0]:
            grown = np.empty((2 * self._data.shape[0], self._data.shape[1]))
            grown[: self._len] = self._data[: self._len]
            self._data = grown
        self._data[self._len] = u.values.reshape(-1)
        self._len += 1

    def array(self) -> np.ndarray:
        """Read-only view of shape ``(levels, nodes)``."""
        v = self._data[: self._len]
        v = v.view()
        v.setflags(write=False)
        return v

    def level(self, m: int) -> GridFunction:
        if m < 0:
            m += self._len
        if not 0 <= m < self._len:
            raise IndexError(m)
        return GridFunction(self.spec, self._data[m].reshape(self.spec.shape))

    @property
    def levels(self) -> list[GridFunction]:
        return [self.level(m) for m in range(self._len)]

    @classmethod
    def from_levels(cls, levels, dt: float, alpha: float) -> History:
        hist = cls(levels[0], dt, alpha, capacity=len(levels))
        for u in levels[1:]:
            hist.append(u)
        return hist


@dataclass(frozen=True)
class StepReport:
    n: int
    increment: float  # ||U^{n+1} - U^n||
    drift: float  # ||U^{n+1} - U^0||
    flux_sup: float
    stability_bound: float
    bound_satisfied: bool
    gradient_range: float  # max |q| over the difference stencil

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def stability_bound(K: float, alpha: float, t: float) -> float:
    """Sup-norm bound on ``U^n - U^0`` at ``t = n dt`` for a monotone scheme.

    ``K Gamma(2-a) / (a (1-a)) t^a`` for ``a < 1``; the classical ``K t`` at
    ``a = 1``, where the fractional constant degenerates.
    """
    if alpha == 1.0:
        return K * t
    return K * gamma(2.0 - alpha) / (alpha * (1.0 - alpha)) * t**alpha


def history_sum(c: np.ndarray, data: np.ndarray) -> np.ndarray:
    """``sum_m c_m U^m`` over the leading axis, accumulated in ascending ``m``."""
    if len(c) > EXTENDED_SUM_LEVEL:
        acc = np.asarray(c, dtype=np.longdouble) @ data.astype(np.longdouble)
        return acc.astype(float)
    return c @ data


def _flux_and_gradient(problem: Problem, spec: GridSpec, values: np.ndarray, t: float,
                       lam: float, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    q = gradient_from_values(values.reshape(spec.shape), spec, problem.ghost(t))
    g = problem.hamiltonian.flux(points, q, lam)
    return np.broadcast_to(g, spec.shape), q


def apply_scheme(
    data: np.ndarray,
    problem: Problem,
    spec: GridSpec,
    w: CaputoWeights,
    points: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The update map on raw arrays: returns ``(U^{n+1}, g, q)`` flattened over nodes.

    ``data`` holds the history, shape ``(n + 1, nodes)``.
    """
    if data.shape[0] != w.n + 1:
        raise ValueError(f"weights for level {w.n} need {w.n + 1} history levels, got {data.shape[0]}")
    if points is None:
        points = spec.coords()
    lam = w.rho / spec.h
    g, q = _flux_and_gradient(problem, spec, data[-1], w.n * w.dt, lam, points)
    new = history_sum(w.c, data) - w.rho * g.reshape(-1)
    return new, g.reshape(-1), q


def step(
    history: History,
    problem: Problem,
    w: CaputoWeights,
    points: np.ndarray | None = None,
) -> tuple[GridFunction, StepReport]:
    """Compute ``U^{n+1}`` from the history; the history itself is not modified."""
    spec = history.spec
    data = history.array()
    new, g, q = apply_scheme(data, problem, spec, w, points)
    bad = ~np.isfinite(new)
    if np.any(bad):
        idx = np.unravel_index(int(np.flatnonzero(bad)[0]), spec.shape)
        raise NumericalFailureError(f"non-finite value at node {idx} computing level {w.n + 1}")
    K = max(history.flux_sup, float(np.max(np.abs(g))))
    bound = stability_bound(K, w.alpha, (w.n + 1) * w.dt)
    drift = float(np.max(np.abs(new - data[0])))
    report = StepReport(
        n=w.n,
        increment=float(np.max(np.abs(new - data[-1]))),
        drift=drift,
        flux_sup=K,
        stability_bound=bound,
        bound_satisfied=drift <= bound + 1e-9 * (1.0 + bound),
        gradient_range=float(np.max(np.abs(q))),
    )
    return GridFunction(spec, new.reshape(spec.shape)), report


@dataclass
class Solution:
    """Result of :func:`solve`."""

    problem: Problem
    history: History
    cfl: CflReport
    reports: list[StepReport] = field(default_factory=list)
    T: float = 0.0

    @property
    def final(self) -> GridFunction:
        return self.history.level(-1)

    @property
    def times(self) -> np.ndarray:
        return self.history.dt * np.arange(len(self.history))

    def error(self, exact: Callable[[float, np.ndarray], np.ndarray] | None = None) -> float:
        """l-infinity error against an exact solution at the final time."""
        exact = exact or self.problem.exact
        if exact is None:
            raise ConfigurationError("no exact solution available")
        spec = self.history.spec
        return float(np.max(np.abs(self.final.values - exact(self.T, spec.coords()))))

    @property
    def stable(self) -> bool:
        return all(r.bound_satisfied for r in self.reports)


def n_steps(T: float, dt: float) -> int:
    """``T / dt`` as an integer; raises if it is not one (to rounding)."""
    if T < 0 or not dt > 0:
        raise ConfigurationError(f"need T >= 0 and dt > 0, got T={T}, dt={dt}")
    ratio = T / dt
    n = round(ratio)
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ConfigurationError(f"T={T} is not an integer multiple of dt={dt}")
    return n


def _prepare(problem: Problem, alpha: float, dt: float, h: float, allow_unstable: bool):
    alpha = check_alpha(alpha)
    ham = problem.hamiltonian
    if ham.flavor == "lax_friedrichs":
        if ham.theta is None:
            ham = ham.with_theta(default_theta(alpha))
            problem = replace(problem, hamiltonian=ham)
        if not 0 < ham.theta <= default_theta(alpha) + 1e-15:
            raise CflInfeasibleError(
                f"theta={ham.theta} outside (0, 1 - 2^-alpha = {default_theta(alpha)}]")
    cfl = cfl_check(ham.flavor, alpha, dt, h, ham.lipschitz_bound, ham.theta, problem.dim)
    if not cfl.satisfied and not allow_unstable:
        raise CflViolationError(
            f"CFL violated: lhs={cfl.lhs:.6g}, rhs={cfl.rhs:.6g}, theta={cfl.theta}")
    return problem, cfl


def solve(
    problem: Problem,
    alpha: float,
    dt: float,
    h: float,
    T: float,
    *,
    allow_unstable: bool = False,
) -> Solution:
    """March from ``t = 0`` to ``t = T`` and return the full history."""
    problem, cfl = _prepare(problem, alpha, dt, h, allow_unstable)
    N = n_steps(T, dt)
    spec = problem.grid(h)
    points = spec.coords()
    u0 = GridFunction.sample(spec, problem.u0)
    history = History(u0, dt, alpha, capacity=N + 1)
    sol = Solution(problem, history, cfl, T=N * dt)
    seq = WeightSequence(alpha, dt)
    grad_limit = problem.hamiltonian.grad_bound
    warned = False
    for _ in range(N):
        w = seq.next()
        new, report = step(history, problem, w, points)
        history.append(new)
        history.flux_sup = report.flux_sup
        sol.reports.append(report)
        if report.gradient_range > grad_limit and not warned:
            warnings.warn(
                f"discrete gradient {report.gradient_range:.4g} exceeds the range "
                f"{grad_limit:.4g} behind the Lipschitz bound (step {report.n})",
                GradientRangeWarning, stacklevel=2)
            warned = True
    return sol


def classical_solve(problem: Problem, dt: float, h: float, T: float, theta: float | None = None,
                    *, allow_unstable: bool = False) -> list[np.ndarray]:
    """Reference explicit scheme ``U^{n+1} = U^n - dt * g`` for ``d_t u + H = 0``.

    Written independently of the fractional machinery; the fractional solver
    at ``alpha = 1`` must reproduce it level by level.
    """
    ham = problem.hamiltonian
    if ham.flavor == "lax_friedrichs":
        if theta is None:
            theta = ham.theta if ham.theta is not None else 0.5
        ham = ham.with_theta(theta)
        cfl = cfl_check(ham.flavor, 1.0, dt, h, ham.lipschitz_bound, theta, problem.dim)
    else:
        cfl = cfl_check(ham.flavor, 1.0, dt, h, ham.lipschitz_bound, None, problem.dim)
    if not cfl.satisfied and not allow_unstable:
        raise CflViolationError("classical CFL violated")
    spec = problem.grid(h)
    points = spec.coords()
    u = problem.u0(points)
    out = [u.reshape(-1)]
    lam = dt / h
    for n in range(n_steps(T, dt)):
        q = gradient_from_values(u, spec, problem.ghost(n * dt))
        u = u - dt * ham.flux(points, q, lam)
        out.append(u.reshape(-1))
    return out
