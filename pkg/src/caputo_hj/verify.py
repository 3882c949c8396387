"""Randomised checks of the structural properties of the update map.

Histories are drawn on a periodic grid so that every node value entering
the map belongs to the history itself. Random levels are separable periodic
walks whose one-sided slopes stay inside the gradient range the problem
declares for its Lipschitz bound, so the CFL hypothesis is meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .caputo import weights
from .grid import GridSpec, gradient_from_values
from .solver import Problem, _prepare, apply_scheme

PROPERTIES = ("commutation", "nonexpansive", "monotone", "gradient_bound", "time_increment",
              "sup_bound")


@dataclass
class PropertyResult:
    name: str
    trials: int = 0
    failures: int = 0
    worst_slack: float = np.inf  # min over trials of (allowed - observed)
    skipped: str | None = None

    @property
    def passed(self) -> bool:
        return self.skipped is not None or self.failures == 0

    def record(self, slack: float, ok: bool) -> None:
        self.trials += 1
        self.failures += 0 if ok else 1
        self.worst_slack = min(self.worst_slack, slack)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "failures": self.failures,
            "worst_slack": None if not np.isfinite(self.worst_slack) else self.worst_slack,
            "skipped": self.skipped,
            "passed": self.passed,
        }


@dataclass
class PropertyReport:
    alpha: float
    dt: float
    h: float
    cfl_satisfied: bool
    results: dict[str, PropertyResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "dt": self.dt,
            "h": self.h,
            "cfl_satisfied": self.cfl_satisfied,
            "passed": self.passed,
            "results": [r.as_dict() for r in self.results.values()],
        }


def _walk(rng: np.random.Generator, n: int, h: float, slope: float) -> np.ndarray:
    """Periodic walk; each increment is at most ``2 * slope * h`` in size."""
    steps = rng.uniform(-slope, slope, n) * h
    steps -= steps.mean()
    return np.concatenate(([0.0], np.cumsum(steps[:-1])))


def random_level(rng: np.random.Generator, spec: GridSpec, slope: float) -> np.ndarray:
    """Separable periodic field with one-sided slopes at most ``2 * slope`` per axis."""
    n = spec.nodes_per_axis
    field_ = rng.uniform(-1.0, 1.0) + _walk(rng, n, spec.h, slope)
    if spec.dim == 2:
        field_ = field_[:, None] + _walk(rng, n, spec.h, slope)[None, :]
    return field_.reshape(-1)


def random_history(rng: np.random.Generator, spec: GridSpec, levels: int, slope: float) -> np.ndarray:
    return np.stack([random_level(rng, spec, slope) for _ in range(levels)])


def verify_g_properties(
    problem: Problem,
    alpha: float,
    dt: float,
    h: float,
    trials: int = 200,
    seed: int = 0,
    levels: int = 8,
    allow_unstable: bool = False,
) -> PropertyReport:
    """Check the update-map properties on ``trials`` random histories.

    ``levels`` is the history length ``n + 1`` fed to the map. With
    ``allow_unstable`` the checks still run when the CFL condition fails;
    monotonicity failures are then expected.
    """
    periodic = replace(problem, boundary_mode="periodic", exact=None)
    periodic, cfl = _prepare(periodic, alpha, dt, h, allow_unstable)
    ham = periodic.hamiltonian
    spec = GridSpec.from_box(problem.dim, problem.box, h, "periodic")
    points = spec.coords()
    rng = np.random.default_rng(seed)

    n = levels - 1
    w = weights(alpha, n, dt)
    w_next = weights(alpha, n + 1, dt)
    lam = w.rho / h
    # base walks and ordered perturbations each use half the admissible slope
    slope = ham.grad_bound / 4 if np.isfinite(ham.grad_bound) else 1.0
    h0 = float(np.max(np.abs(ham.H(points, np.zeros_like(points)))))

    def G(data: np.ndarray, wts=w) -> np.ndarray:
        return apply_scheme(data, periodic, spec, wts, points)[0]

    def flux_sup(data: np.ndarray) -> float:
        out = 0.0
        for level in data:
            q = gradient_from_values(level.reshape(spec.shape), spec)
            out = max(out, float(np.max(np.abs(ham.flux(points, q, lam)))))
        return out

    def grad_norm(data: np.ndarray) -> float:
        return max(float(np.max(np.abs(gradient_from_values(v.reshape(spec.shape), spec))))
                   for v in np.atleast_2d(data))

    report = PropertyReport(alpha, dt, h, cfl.satisfied)
    res = {name: PropertyResult(name) for name in PROPERTIES}
    report.results = res
    if ham.spatial_lipschitz is None:
        res["gradient_bound"].skipped = "H does not depend on x; bound is vacuous"

    for trial in range(trials):
        U = random_history(rng, spec, levels, slope)
        GU = G(U)
        scale = 1.0 + float(np.max(np.abs(U)))

        lam_shift = rng.uniform(-5.0, 5.0)
        dev = float(np.max(np.abs(G(U + lam_shift) - GU - lam_shift)))
        tol = 1e-12 * (scale + abs(lam_shift))
        res["commutation"].record(tol - dev, dev <= tol)

        V = random_history(rng, spec, levels, slope)
        lhs = float(np.max(np.abs(GU - G(V))))
        rhs = float(np.max(np.abs(U - V)))
        res["nonexpansive"].record(rhs - lhs, lhs <= rhs + 1e-12 * scale)

        if trial % 2:
            # a bump at one node of the newest level isolates a single stencil
            # coefficient; its height keeps gradients inside the admissible range
            delta = np.zeros_like(U)
            delta[-1, rng.integers(spec.size)] = rng.uniform(0.0, 2.0 * slope * spec.h)
        else:
            delta = random_history(rng, spec, levels, slope)
            delta -= delta.min(axis=1, keepdims=True)
            delta *= rng.uniform(0.0, 1.0, (levels, 1))
        gap = float(np.min(G(U + delta) - GU))
        tol = 1e-13 * scale
        res["monotone"].record(gap + tol, gap >= -tol)

        lhs = float(np.max(np.abs(GU)))
        rhs = float(np.max(np.abs(U))) + w.rho * h0
        res["sup_bound"].record(rhs - lhs, lhs <= rhs + 1e-12 * scale)

        U_ext = np.concatenate([U, random_level(rng, spec, slope)[None, :]])
        lhs = float(np.max(np.abs(G(U_ext, w_next) - GU)))
        rhs = ((1.0 - w_next.c[0]) * float(np.max(np.abs(np.diff(U_ext, axis=0))))
               + 2.0 * w.rho * flux_sup(U_ext))
        res["time_increment"].record(rhs - lhs, lhs <= rhs + 1e-12 * scale)

        if ham.spatial_lipschitz is not None:
            C = ham.spatial_lipschitz
            lhs = grad_norm(GU)
            rhs = 5.0 * C * grad_norm(U) + C
            res["gradient_bound"].record(rhs - lhs, lhs <= rhs + 1e-12 * scale)

    return report
