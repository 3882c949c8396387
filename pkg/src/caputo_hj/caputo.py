"""L1 discretisation of the Caputo time derivative.

For a history ``U^0 .. U^{n+1}`` on a uniform time grid the discrete
derivative at level ``n + 1`` is::

    (U^{n+1} - sum_m c_m^{n+1} U^m) / rho,    rho = Gamma(2 - alpha) * dt**alpha

The weights are differences of the increments
``d_k = (k + 1)**(1 - alpha) - k**(1 - alpha)``: ``c_0 = d_n`` and
``c_m = d_{n-m} - d_{n-m+1}``. The convention ``0**(1 - alpha) = 0`` is kept
at ``alpha = 1`` so that the weights become ``(0, ..., 0, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import DomainError, gamma

__all__ = [
    "CaputoWeights",
    "WeightSequence",
    "caputo_apply",
    "check_alpha",
    "direct_weights",
    "increments",
    "rho",
    "truncation_order",
    "weights",
]


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha


def rho(alpha: float, dt: float) -> float:
    """Scale ``Gamma(2 - alpha) * dt**alpha``."""
    alpha = check_alpha(alpha)
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    return gamma(2.0 - alpha) * dt**alpha


def increments(alpha: float, count: int) -> np.ndarray:
    """``d_k = (k+1)**(1-alpha) - k**(1-alpha)`` for ``k < count``, cancellation-free."""
    beta = 1.0 - check_alpha(alpha)
    d = np.empty(count)
    if count == 0:
        return d
    d[0] = 1.0
    k = np.arange(1, count, dtype=float)
    d[1:] = k**beta * np.expm1(beta * np.log1p(1.0 / k))
    return d


@dataclass(frozen=True)
class CaputoWeights:
    """Weights ``c_0^{n+1} .. c_n^{n+1}`` and scale for one time level."""

    alpha: float
    n: int
    dt: float
    c: np.ndarray = field(repr=False)
    rho: float

    def __post_init__(self) -> None:
        if len(self.c) != self.n + 1:
            raise ValueError(f"level {self.n} needs {self.n + 1} weights, got {len(self.c)}")


def _weights_from_increments(d: np.ndarray, n: int) -> np.ndarray:
    c = np.empty(n + 1)
    c[0] = d[n]
    if n:
        # c_m = d_{n-m} - d_{n-m+1}, m = 1..n
        c[1:] = d[n - 1::-1] - d[n:0:-1]
    return c


def weights(alpha: float, n: int, dt: float) -> CaputoWeights:
    """Weights targeting level ``n + 1``."""
    alpha = check_alpha(alpha)
    if n < 0:
        raise DomainError(f"time level must be nonnegative, got {n}")
    d = increments(alpha, n + 1)
    c = _weights_from_increments(d, n)
    c.setflags(write=False)
    return CaputoWeights(alpha, n, float(dt), c, rho(alpha, dt))


def direct_weights(alpha: float, n: int) -> np.ndarray:
    """Weights straight from the power formulas (reference path)."""
    beta = 1.0 - check_alpha(alpha)

    def pw(k):
        k = np.asarray(k, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(k > 0, k**beta, 0.0)

    m = np.arange(1, n + 1, dtype=float)
    c = np.empty(n + 1)
    c[0] = pw(n + 1) - pw(n)
    c[1:] = 2 * pw(n + 1 - m) - pw(n + 2 - m) - pw(n - m)
    return c


class WeightSequence:
    """Produces the weights level by level.

    Going from level ``n + 1`` to ``n + 2`` the old ``c_1 .. c_n`` become
    ``c_2 .. c_{n+1}``; only ``c_0`` and ``c_1`` are new.
    """

    def __init__(self, alpha: float, dt: float):
        self.alpha = check_alpha(alpha)
        self.dt = float(dt)
        self.rho = rho(alpha, dt)
        self._beta = 1.0 - self.alpha
        self._n = -1
        self._tail = np.empty(0)  # c_1 .. c_n of the current level
        self._d_prev = 1.0  # d_n of the current level

    def _increment(self, k: int) -> float:
        if k == 0:
            return 1.0
        return k**self._beta * math.expm1(self._beta * math.log1p(1.0 / k))

    def next(self) -> CaputoWeights:
        n = self._n + 1
        if n == 0:
            c = np.array([1.0])
            self._d_prev = 1.0
        else:
            d_n = self._increment(n)
            self._tail = np.concatenate(([self._d_prev - d_n], self._tail))
            self._d_prev = d_n
            c = np.concatenate(([d_n], self._tail))
        self._n = n
        c.setflags(write=False)
        return CaputoWeights(self.alpha, n, self.dt, c, self.rho)

    def __iter__(self):
        while True:
            yield self.next()


def caputo_apply(w: CaputoWeights, history) -> float | np.ndarray:
    """Discrete Caputo derivative at level ``n + 1``.

    ``history`` holds ``U^0 .. U^{n+1}`` along its first axis; trailing axes
    (grid nodes) are carried through.
    """
    h = np.asarray(history, dtype=float)
    if h.shape[0] != w.n + 2:
        raise ValueError(f"history must hold {w.n + 2} levels, got {h.shape[0]}")
    out = (h[-1] - np.tensordot(w.c, h[:-1], axes=(0, 0))) / w.rho
    return float(out) if np.ndim(out) == 0 else out


def caputo_of_samples(alpha: float, dt: float, samples: Sequence[float]) -> float:
    """Discrete derivative at the last sample of ``f(0), f(dt), ..., f(N dt)``."""
    n = len(samples) - 2
    return caputo_apply(weights(alpha, n, dt), samples)


def truncation_order(
    alpha: float,
    f: Callable[[np.ndarray], np.ndarray],
    exact: Callable[[float], float],
    t: float = 1.0,
    dt: float = 1e-2,
) -> float:
    """Observed order of the L1 formula at time ``t`` from steps ``dt`` and ``dt/2``.

    Returns ``inf`` when both errors sit at rounding level (the formula is
    exact, e.g. on linear functions).
    """
    errs = []
    for step in (dt, dt / 2):
        n_steps = round(t / step)
        samples = f(step * np.arange(n_steps + 1))
        errs.append(abs(caputo_of_samples(alpha, step, samples) - exact(t)))
    floor = 1e-12 * max(1.0, abs(exact(t)))
    if errs[0] <= floor and errs[1] <= floor:
        return math.inf
    return math.log2(errs[0] / errs[1])
