"""Cubes, uniform midpoint grids and aligned subcube partitions.

Cells of a grid are enumerated lexicographically with axis 0 most
significant, i.e. the flat index of ``(i_0, ..., i_{N-1})`` is
``sum(i_a * m**(N-1-a))``. The same order is used by every file format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlignmentError, ClusterCertError


@dataclass(frozen=True)
class Cube:
    """Open axis-aligned cube ``Q_r(x0)`` with the given center and side."""

    center: tuple[float, ...]
    side: float

    def __post_init__(self):
        center = tuple(float(x) for x in self.center)
        if len(center) < 1:
            raise ClusterCertError("cube dimension must be >= 1")
        if not all(math.isfinite(x) for x in center):
            raise ClusterCertError("cube center must be finite")
        side = float(self.side)
        if not (side > 0 and math.isfinite(side)):
            raise ClusterCertError(f"cube side must be positive, got {self.side}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "side", side)

    @classmethod
    def unit(cls, dim: int) -> "Cube":
        return cls((0.0,) * dim, 1.0)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return self.side**self.dim

    @property
    def diagonal(self) -> float:
        return math.sqrt(self.dim) * self.side

    def contains(self, x: Sequence[float]) -> bool:
        half = self.side / 2
        return all(abs(xi - ci) < half for xi, ci in zip(x, self.center))


def _check_index(idx: Sequence[int], dim: int, bound: int, what: str) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if len(idx) != dim:
        raise ClusterCertError(f"{what} must have {dim} components, got {len(idx)}")
    for i in idx:
        if not 0 <= i < bound:
            raise ClusterCertError(f"{what} component {i} out of range [0, {bound})")
    return idx


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``m`` cells per axis over ``cube``."""

    cube: Cube
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ClusterCertError(f"cells per axis must be a positive integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def dim(self) -> int:
        return self.cube.dim

    @property
    def h(self) -> float:
        return self.cube.side / self.m

    @property
    def n_cells(self) -> int:
        return self.m**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.m,) * self.dim

    def flat_index(self, idx: Sequence[int]) -> int:
        idx = _check_index(idx, self.dim, self.m, "cell index")
        return int(np.ravel_multi_index(idx, self.shape))

    def multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.shape))

    def rehost(self, cube: Cube) -> "GridSpec":
        if cube.dim != self.dim:
            raise ClusterCertError("cannot rehost a grid on a cube of different dimension")
        return GridSpec(cube, self.m)

    def centers(self) -> np.ndarray:
        """All cell midpoints as an ``(M, N)`` array in lexicographic order."""
        lo = np.asarray(self.cube.center) - self.cube.side / 2
        ticks = (np.arange(self.m) + 0.5) * self.h
        axes = [lo[a] + ticks for a in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Cell-midpoint samples of a function on ``spec``; values are read-only."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.size != self.spec.n_cells:
            raise ClusterCertError(
                f"expected {self.spec.n_cells} values for m={self.spec.m}, N={self.spec.dim}, "
                f"got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ClusterCertError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def cube(self) -> Cube:
        return self.spec.cube

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def m(self) -> int:
        return self.spec.m

    def as_array(self) -> np.ndarray:
        """Values reshaped to ``(m,) * N`` (a read-only view)."""
        return self.values.reshape(self.spec.shape)

    def scaled(self, t: float) -> "GridFunction":
        return GridFunction(self.spec, t * self.values)

    def shifted(self, c: float) -> "GridFunction":
        return GridFunction(self.spec, self.values + c)

    def rehost(self, cube: Cube) -> "GridFunction":
        """Same sample array on a different cube (no resampling)."""
        return GridFunction(self.spec.rehost(cube), self.values)


def cell_center(spec: GridSpec, idx: Sequence[int]) -> np.ndarray:
    idx = _check_index(idx, spec.dim, spec.m, "cell index")
    c = np.asarray(spec.cube.center)
    return c - spec.cube.side / 2 + (np.asarray(idx) + 0.5) * spec.h


def subcube(cube: Cube, k: int, j: Sequence[int]) -> Cube:
    """The ``j``-th cube of the partition of ``cube`` into ``k**N`` cubes of side ``side/k``."""
    if int(k) != k or k < 1:
        raise ClusterCertError(f"partition depth must be a positive integer, got {k}")
    j = _check_index(j, cube.dim, k, "subcube index")
    side = cube.side / k
    center = [c - cube.side / 2 + (ji + 0.5) * side for c, ji in zip(cube.center, j)]
    return Cube(tuple(center), side)


def block_size(m: int, k: int) -> int:
    """Cells per axis of each subcube; raises unless ``k`` divides ``m``."""
    if int(k) != k or k < 1:
        raise ClusterCertError(f"partition depth must be a positive integer, got {k}")
    if m % k:
        raise AlignmentError(f"partition depth k={k} does not divide m={m}")
    return m // k


def subcube_indices(dim: int, k: int):
    """All subcube multi-indices of a ``k**dim`` partition, lexicographic order."""
    return [tuple(int(i) for i in idx) for idx in np.ndindex(*(k,) * dim)]


def restrict(u: GridFunction, k: int, j: Sequence[int]) -> GridFunction:
    b = block_size(u.m, k)
    j = _check_index(j, u.dim, k, "subcube index")
    window = tuple(slice(ji * b, (ji + 1) * b) for ji in j)
    block = u.as_array()[window]
    return GridFunction(GridSpec(subcube(u.cube, k, j), b), block.ravel())


def block_view(u: GridFunction, k: int) -> np.ndarray:
    """Values as a ``(k,)*N + (b,)*N`` view: leading axes select the subcube."""
    b = block_size(u.m, k)
    n = u.dim
    arr = u.as_array().reshape(sum(((k, b) for _ in range(n)), ()))
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return arr.transpose(order)


def divisors(m: int) -> list[int]:
    return [d for d in range(1, m + 1) if m % d == 0]
