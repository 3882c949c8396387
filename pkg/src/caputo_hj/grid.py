"""Uniform 1D/2D node grids, grid functions and one-sided differences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal

import numpy as np

BoundaryMode = Literal["periodic", "dirichlet_from_exact", "dirichlet_frozen"]
BOUNDARY_MODES = ("periodic", "dirichlet_from_exact", "dirichlet_frozen")

# ghost(points) -> values, points has shape (k, dim)
GhostProvider = Callable[[np.ndarray], np.ndarray]


class MissingGhostError(ValueError):
    """A Dirichlet-mode difference was requested without ghost values."""


@dataclass(frozen=True)
class GridSpec:
    """Node-centred uniform grid with equal spacing on every axis.

    Periodic grids hold ``nodes_per_axis`` nodes covering one period
    (``nodes_per_axis * h``); Dirichlet grids include both box endpoints.
    """

    dim: int
    h: float
    origin: tuple[float, ...]
    nodes_per_axis: int
    boundary_mode: BoundaryMode = "dirichlet_frozen"

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"h must be positive, got {self.h}")
        if len(self.origin) != self.dim:
            raise ValueError("origin needs one entry per axis")
        if self.nodes_per_axis < 2:
            raise ValueError("need at least two nodes per axis")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary mode {self.boundary_mode!r}")

    @classmethod
    def from_box(
        cls, dim: int, box: tuple[float, float], h: float, boundary_mode: BoundaryMode
    ) -> GridSpec:
        """Grid on ``[a, b]**dim``; ``(b - a) / h`` must be an integer."""
        a, b = float(box[0]), float(box[1])
        if not b > a:
            raise ValueError(f"empty box {box}")
        cells = (b - a) / h
        n = round(cells)
        if n < 1 or abs(cells - n) > 1e-9 * max(1.0, cells):
            raise ValueError(f"box length {b - a} is not an integer multiple of h={h}")
        nodes = n if boundary_mode == "periodic" else n + 1
        return cls(dim, float(h), (a,) * dim, nodes, boundary_mode)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nodes_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.nodes_per_axis**self.dim

    @property
    def periodic(self) -> bool:
        return self.boundary_mode == "periodic"

    def axis_coords(self, axis: int = 0) -> np.ndarray:
        return self.origin[axis] + self.h * np.arange(self.nodes_per_axis)

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``self.shape + (dim,)``."""
        axes = [self.axis_coords(k) for k in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def ghost_coords(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Per axis, coordinates of the low and high ghost layers."""
        out = []
        pts = self.coords()
        for axis in range(self.dim):
            lo = np.take(pts, [0], axis=axis).copy()
            hi = np.take(pts, [-1], axis=axis).copy()
            lo[..., axis] -= self.h
            hi[..., axis] += self.h
            out.append((lo, hi))
        return out


@dataclass(frozen=True)
class GridFunction:
    """Immutable node values of a scalar field on a :class:`GridSpec`."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.shape != self.spec.shape:
            raise ValueError(f"values have shape {v.shape}, grid needs {self.spec.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, spec: GridSpec, fn: Callable[[np.ndarray], np.ndarray]) -> GridFunction:
        """Evaluate ``fn`` on the node coordinates (last axis = components)."""
        return cls(spec, fn(spec.coords()))


def _padded(values: np.ndarray, spec: GridSpec, ghost: GhostProvider | None) -> np.ndarray:
    """Values with one ghost layer on each side of every axis (corners unused)."""
    if spec.periodic:
        return np.pad(values, 1, mode="wrap")
    if ghost is None:
        raise MissingGhostError(f"{spec.boundary_mode} grid needs a ghost-value provider")
    p = np.pad(values, 1, mode="constant", constant_values=np.nan)
    inner = (slice(1, -1),) * spec.dim
    for axis, (lo, hi) in enumerate(spec.ghost_coords()):
        lo_idx = list(inner)
        hi_idx = list(inner)
        lo_idx[axis] = slice(0, 1)
        hi_idx[axis] = slice(-1, None)
        p[tuple(lo_idx)] = np.asarray(ghost(lo)).reshape(lo.shape[:-1])
        p[tuple(hi_idx)] = np.asarray(ghost(hi)).reshape(hi.shape[:-1])
    return p


def _forward_from_padded(p: np.ndarray, dim: int, axis: int, h: float) -> np.ndarray:
    """Forward differences on the interior plus the low ghost layer along ``axis``.

    Result has ``n + 1`` entries along ``axis``: index ``k`` is the difference
    at node ``k - 1``, so ``[1:]`` is ``D+ U_i`` and ``[:-1]`` is ``D+ U_{i-1}``.
    """
    idx_hi = [slice(1, -1)] * dim
    idx_lo = [slice(1, -1)] * dim
    idx_hi[axis] = slice(1, None)
    idx_lo[axis] = slice(0, -1)
    return (p[tuple(idx_hi)] - p[tuple(idx_lo)]) / h


def forward_diff(u: GridFunction, axis: int = 1, ghost: GhostProvider | None = None) -> GridFunction:
    """``(U[i+1] - U[i]) / h`` along ``axis`` (1-based, as in ``D_1^+``, ``D_2^+``)."""
    spec = u.spec
    if axis not in range(1, spec.dim + 1):
        raise ValueError(f"axis must be in 1..{spec.dim}, got {axis}")
    p = _padded(u.values, spec, ghost)
    d = _forward_from_padded(p, spec.dim, axis - 1, spec.h)
    return GridFunction(spec, np.take(d, range(1, spec.nodes_per_axis + 1), axis=axis - 1))


def gradient_from_values(
    values: np.ndarray, spec: GridSpec, ghost: GhostProvider | None = None
) -> np.ndarray:
    """Raw-array form of :func:`discrete_gradient`; used by the time stepper."""
    p = _padded(values, spec, ghost)
    parts = []
    for axis in range(spec.dim):
        d = _forward_from_padded(p, spec.dim, axis, spec.h)
        n = spec.nodes_per_axis
        parts.append(np.take(d, range(1, n + 1), axis=axis))
        parts.append(np.take(d, range(0, n), axis=axis))
    return np.stack(parts, axis=-1)


def discrete_gradient(u: GridFunction, ghost: GhostProvider | None = None) -> np.ndarray:
    """Per node ``(D1+ U_i, D1+ U_{i-1}, D2+ U_j, D2+ U_{j-1})``.

    Returns an array of shape ``u.spec.shape + (2 * dim,)``.
    """
    return gradient_from_values(u.values, u.spec, ghost)


def sup_norm(u: GridFunction | np.ndarray) -> float:
    v = u.values if isinstance(u, GridFunction) else np.asarray(u)
    return float(np.max(np.abs(v))) if v.size else 0.0


def write_snapshot(u: GridFunction, path: str | Path) -> None:
    """CSV with one row per node: coordinates then value, row-major order."""
    spec = u.spec
    names = ["x", "y"][: spec.dim]
    pts = spec.coords().reshape(-1, spec.dim)
    data = np.column_stack([pts, u.values.reshape(-1)])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=",".join([*names, "value"]),
               comments="", newline="\n")


def read_snapshot(path: str | Path, spec: GridSpec) -> GridFunction:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return GridFunction(spec, data[:, -1].reshape(spec.shape))
