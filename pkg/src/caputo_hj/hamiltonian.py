"""Monotone numerical Hamiltonians and CFL conditions for the explicit scheme.

A numerical Hamiltonian ``g(x, q)`` takes, per axis, the forward and the
backward one-sided difference ``q = (q1_fwd, q1_bwd, q2_fwd, q2_bwd)``.

The Lax-Friedrichs viscosity is split evenly over the axes::

    g = H(x, (q_fwd + q_bwd) / 2) - theta / (dim * lam) * sum_axis (q_fwd - q_bwd)

with ``lam = rho / h``. In one dimension this is the textbook flux; the
``1 / dim`` factor keeps the centre coefficient ``c_n - 2 theta`` of the 2D
update nonnegative for the same ``theta`` window.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .caputo import check_alpha
from .numerics import gamma

Flavor = Literal["upwind_nonincreasing", "upwind_nondecreasing", "lax_friedrichs"]
FLAVORS = ("upwind_nonincreasing", "upwind_nondecreasing", "lax_friedrichs")

# H(x, p) with x, p of shape (..., dim); returns shape (...)
HamiltonianFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

CFL_SAFETY = 0.95


class ConfigurationError(ValueError):
    pass


class CflInfeasibleError(ConfigurationError):
    """No time step satisfies the CFL condition (e.g. theta above its window)."""


def default_theta(alpha: float) -> float:
    """Largest admissible Lax-Friedrichs viscosity, ``1 - 2**-alpha``."""
    return 1.0 - 2.0 ** (-check_alpha(alpha))


def last_weight(alpha: float) -> float:
    """``c_n^{n+1} = 2 - 2**(1 - alpha)``, identical for every level n >= 1."""
    return 2.0 - 2.0 ** (1.0 - alpha)


@dataclass(frozen=True)
class NumericalHamiltonian:
    """Flux ``g`` built from a continuous Hamiltonian ``H``.

    ``lipschitz_bound`` bounds ``|dH/dp_k|`` per component for gradients with
    ``|p_k| <= grad_bound``; the scheme's CFL condition is only meaningful
    while the discrete gradients stay inside that range.
    ``spatial_lipschitz`` is the constant of the ``x``-regularity condition
    for x-dependent Hamiltonians (``None`` when H does not depend on x).
    """

    flavor: Flavor
    H: HamiltonianFn
    lipschitz_bound: float
    theta: float | None = None
    grad_bound: float = math.inf
    spatial_lipschitz: float | None = None

    def __post_init__(self) -> None:
        if self.flavor not in FLAVORS:
            raise ConfigurationError(f"unknown flavor {self.flavor!r}")
        if not (self.lipschitz_bound > 0 and math.isfinite(self.lipschitz_bound)):
            raise ConfigurationError("lipschitz_bound must be positive and finite")
        if self.flavor == "lax_friedrichs" and self.theta is not None and not self.theta > 0:
            raise ConfigurationError(f"theta must be positive, got {self.theta}")
        if self.flavor != "lax_friedrichs":
            self._check_direction()

    def _check_direction(self) -> None:
        span = self.grad_bound if math.isfinite(self.grad_bound) else 1.0
        p = np.linspace(-span, span, 21)
        x = np.zeros((p.size, 1))
        vals = np.asarray(self.H(x, p[:, None]), dtype=float)
        diffs = np.diff(vals)
        if self.flavor == "upwind_nonincreasing" and np.any(diffs > 1e-12):
            warnings.warn("H increases along p; upwind_nonincreasing is not monotone",
                          stacklevel=3)
        if self.flavor == "upwind_nondecreasing" and np.any(diffs < -1e-12):
            warnings.warn("H decreases along p; upwind_nondecreasing is not monotone",
                          stacklevel=3)

    def with_theta(self, theta: float) -> NumericalHamiltonian:
        return NumericalHamiltonian(self.flavor, self.H, self.lipschitz_bound, theta,
                                    self.grad_bound, self.spatial_lipschitz)

    def flux(self, x: np.ndarray, q: np.ndarray, lam: float | None = None) -> np.ndarray:
        """Vectorised ``g(x, q)``; ``q`` has shape ``(..., 2 * dim)``."""
        q = np.asarray(q, dtype=float)
        fwd = q[..., 0::2]
        bwd = q[..., 1::2]
        if self.flavor == "upwind_nonincreasing":
            return self.H(x, fwd)
        if self.flavor == "upwind_nondecreasing":
            return self.H(x, bwd)
        if lam is None or self.theta is None:
            raise ConfigurationError("Lax-Friedrichs flux needs theta and lam = rho / h")
        dim = fwd.shape[-1]
        return self.H(x, 0.5 * (fwd + bwd)) - self.theta / (dim * lam) * np.sum(fwd - bwd, axis=-1)


def flux_eval(g: NumericalHamiltonian, x, q, lam: float | None = None) -> float:
    """Flux at a single node."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(g.flux(x, np.asarray(q, dtype=float), lam))


@dataclass(frozen=True)
class CflReport:
    flavor: str
    alpha: float
    dt: float
    h: float
    L: float
    dim: int
    theta: float | None
    satisfied: bool
    lhs: float
    rhs: float
    theta_window: tuple[float, float] | None = None

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["theta_window"] = list(self.theta_window) if self.theta_window else None
        return d


def _scheme_kind(flavor: str) -> str:
    if flavor in ("upwind", "upwind_nonincreasing", "upwind_nondecreasing"):
        return "upwind"
    if flavor == "lax_friedrichs":
        return "lax_friedrichs"
    raise ConfigurationError(f"unknown flavor {flavor!r}")


def cfl_check(
    flavor: str,
    alpha: float,
    dt: float,
    h: float,
    L: float,
    theta: float | None = None,
    dim: int = 1,
) -> CflReport:
    """Monotonicity (CFL) condition of the explicit scheme.

    Upwind: ``dim * dt**alpha * L / h <= (2 - 2**(1-alpha)) / Gamma(2-alpha)``.
    Lax-Friedrichs: ``theta`` must lie in
    ``[dim * Gamma(2-alpha) * dt**alpha * L / (2h), 1 - 2**-alpha]``.
    """
    alpha = check_alpha(alpha)
    if not (dt > 0 and h > 0 and L > 0):
        raise ConfigurationError("dt, h and L must be positive")
    if _scheme_kind(flavor) == "upwind":
        lhs = dim * dt**alpha * L / h
        rhs = last_weight(alpha) / gamma(2.0 - alpha)
        return CflReport(flavor, alpha, dt, h, L, dim, theta, lhs <= rhs, lhs, rhs)
    if theta is None:
        theta = default_theta(alpha)
    lo = dim * gamma(2.0 - alpha) * dt**alpha * L / (2.0 * h)
    hi = default_theta(alpha)
    ok = lo <= hi and lo <= theta <= hi
    return CflReport(flavor, alpha, dt, h, L, dim, theta, ok, lo, hi, (lo, hi))


def suggest_dt(
    flavor: str,
    alpha: float,
    h: float,
    L: float,
    theta: float | None = None,
    dim: int = 1,
    safety: float = CFL_SAFETY,
) -> float:
    """Largest CFL-admissible time step, times ``safety``."""
    alpha = check_alpha(alpha)
    if _scheme_kind(flavor) == "upwind":
        bound = last_weight(alpha) / gamma(2.0 - alpha) * h / (dim * L)
    else:
        if theta is None:
            theta = default_theta(alpha)
        if not (0 < theta <= default_theta(alpha)):
            raise CflInfeasibleError(
                f"theta={theta} outside (0, {default_theta(alpha)}]; no time step is monotone")
        bound = 2.0 * h * theta / (dim * gamma(2.0 - alpha) * L)
    return safety * bound ** (1.0 / alpha)


def check_spatial_lipschitz(
    g: NumericalHamiltonian,
    points: np.ndarray,
    q: np.ndarray,
    lam: float | None = None,
    eps: float = 1e-6,
) -> float:
    """Largest observed ``|dg/dx| / (1 + sum |q|)`` by central differences.

    Compare against ``g.spatial_lipschitz``; for x-independent H this is 0.
    """
    points = np.atleast_2d(points)
    worst = 0.0
    for k in range(points.shape[-1]):
        e = np.zeros(points.shape[-1])
        e[k] = eps
        dg = (g.flux(points + e, q, lam) - g.flux(points - e, q, lam)) / (2 * eps)
        ratio = np.abs(dg) / (1.0 + np.sum(np.abs(q), axis=-1))
        worst = max(worst, float(np.max(ratio)))
    return worst
