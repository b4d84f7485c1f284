"""Discrete Gagliardo, gradient-L^p and total-variation seminorms.

All three use midpoint samples. The Gagliardo seminorm is the midpoint-rule
approximation of the double integral with the diagonal cells excluded::

    [u]^p ~ sum_{i != j} |u_i - u_j|^p / |x_i - x_j|^(N + p*s) * h^(2N)

On a uniform grid the kernel depends only on the integer offset between two
cells, so the fast path groups pairs by offset: for every offset ``d`` in a
half-space it accumulates ``D(d) = sum_i |u_{i+d} - u_i|^p`` once and then
forms ``2 * h^(2N) * sum_d K(d) D(d)``. ``D`` does not depend on ``s`` or on
the cube, which is what :class:`DifferenceProfile` exposes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import offset_block_sums
from .errors import ClusterCertError, ResolutionError
from .geometry import GridFunction, block_size

#: offsets handled per parallel task; fixed so the reduction order never
#: depends on the worker count
CHUNK_OFFSETS = 256


@dataclass(frozen=True)
class FractionalParams:
    s: float
    p: float

    def __post_init__(self):
        s, p = float(self.s), float(self.p)
        if not 0.0 < s < 1.0:
            raise ClusterCertError(f"s must lie in (0, 1), got {self.s}")
        if not (p >= 1.0 and math.isfinite(p)):
            raise ClusterCertError(f"p must be a finite real >= 1, got {self.p}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "p", p)

    def kernel_exponent(self, dim: int) -> float:
        return dim + self.p * self.s

    def to_dict(self) -> dict:
        return {"s": self.s, "p": self.p}


def default_workers() -> int:
    raw = os.environ.get("CLUSTERCERT_WORKERS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def half_offsets(dim: int, b: int) -> np.ndarray:
    """Nonzero offsets in ``(-b, b)**dim`` whose first nonzero entry is positive."""
    if b < 2:
        return np.zeros((0, dim), dtype=np.int64)
    rng = np.arange(-(b - 1), b, dtype=np.int64)
    grid = np.stack([g.ravel() for g in np.meshgrid(*([rng] * dim), indexing="ij")], axis=1)
    nz = grid != 0
    first = np.argmax(nz, axis=1)
    keep = nz.any(axis=1) & (grid[np.arange(len(grid)), first] > 0)
    return np.ascontiguousarray(grid[keep])


@dataclass(frozen=True, eq=False)
class DifferenceProfile:
    """Per-offset, per-block sums ``D[o, q]`` of ``|u(i+d_o) - u(i)|^p``."""

    dim: int
    m: int
    k: int
    p: float
    offsets: np.ndarray
    sums: np.ndarray

    def seminorms_p(self, s: float, h: float) -> np.ndarray:
        """``[u_q]^p`` for every block ``q`` given the order ``s`` and cell side ``h``."""
        n_blocks = self.k**self.dim
        if len(self.offsets) == 0:
            return np.zeros(n_blocks)
        dist = np.sqrt(np.sum((self.offsets * h) ** 2, axis=1))
        weight = dist ** -(self.dim + self.p * s)
        scale = 2.0 * h ** (2 * self.dim)
        terms = weight[:, None] * self.sums
        return np.array([scale * math.fsum(terms[:, q]) for q in range(n_blocks)])


def difference_profile(u: GridFunction, p: float, k: int = 1, workers: int | None = None) -> DifferenceProfile:
    """Offset-grouped difference sums of ``u`` restricted to the blocks of an aligned ``k``-partition."""
    b = block_size(u.m, k)
    dim = u.dim
    offsets = half_offsets(dim, b)
    sums = np.zeros((len(offsets), k**dim))
    values = np.ascontiguousarray(u.values)
    p = float(p)
    chunks = [slice(i, min(i + CHUNK_OFFSETS, len(offsets))) for i in range(0, len(offsets), CHUNK_OFFSETS)]

    def run(sl):
        offset_block_sums(values, u.m, dim, b, k, offsets[sl], p, sums[sl])

    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(chunks) <= 1:
        for sl in chunks:
            run(sl)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, chunks))
    return DifferenceProfile(dim, u.m, k, p, offsets, sums)


def gagliardo_naive(u: GridFunction, params: FractionalParams, rows_per_block: int = 64) -> float:
    """Reference value: every ordered pair of distinct cells, distances from the midpoints.

    Rows (first cell of the pair) are processed ``rows_per_block`` at a time;
    each row total is a plain numpy sum and the row totals are combined with
    ``math.fsum``. Memory ``O(rows_per_block * M)``, time ``O(M^2)``.
    """
    x = u.spec.centers()
    v = u.values
    expo = params.kernel_exponent(u.dim)
    n = len(v)
    rows = []
    for start in range(0, n, rows_per_block):
        stop = min(start + rows_per_block, n)
        diff = x[None, :, :] - x[start:stop, None, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        num = np.abs(v[None, :] - v[start:stop, None]) ** params.p
        diag = (np.arange(stop - start), np.arange(start, stop))
        dist[diag] = 1.0
        num[diag] = 0.0
        rows.extend(np.sum(num / dist**expo, axis=1).tolist())
    total = math.fsum(rows) * u.spec.h ** (2 * u.dim)
    return total ** (1.0 / params.p)


def gagliardo(
    u: GridFunction,
    params: FractionalParams,
    workers: int | None = None,
    profile: DifferenceProfile | None = None,
) -> float:
    """Discrete Gagliardo seminorm ``[u]_{s,p}`` over the whole grid.

    A precomputed ``profile`` (same values, same ``p``, ``k=1``) may be passed
    to skip the pair sweep; this is how several ``s`` or rehosted cubes share
    one ``O(M^2)`` pass.
    """
    if profile is None:
        profile = difference_profile(u, params.p, 1, workers)
    elif profile.k != 1 or profile.p != params.p or profile.m != u.m or profile.dim != u.dim:
        raise ClusterCertError("difference profile does not match the grid function")
    return float(profile.seminorms_p(params.s, u.spec.h)[0] ** (1.0 / params.p))


def gagliardo_subcube_batch(
    u: GridFunction, params: FractionalParams, k: int, workers: int | None = None
) -> np.ndarray:
    """``gagliardo(restrict(u, k, j))`` for every ``j`` in lexicographic order."""
    profile = difference_profile(u, params.p, k, workers)
    return profile.seminorms_p(params.s, u.spec.h) ** (1.0 / params.p)


def _forward_differences(u: GridFunction) -> list[np.ndarray]:
    if u.m < 2:
        raise ResolutionError("finite-difference seminorms need m >= 2")
    arr = u.as_array()
    out = []
    for a in range(u.dim):
        d = np.zeros_like(arr)
        lead = [slice(None)] * u.dim
        lead[a] = slice(0, u.m - 1)
        d[tuple(lead)] = np.diff(arr, axis=a)
        out.append(d)
    return out


def grad_lp(u: GridFunction, p: float) -> float:
    """``||grad u||_p`` with forward differences, zero across the far faces.

    The per-cell gradient takes component ``a`` as ``(u_{i+e_a} - u_i)/h``
    when the successor exists and 0 otherwise.
    """
    p = float(p)
    if p < 1:
        raise ClusterCertError(f"p must be >= 1, got {p}")
    h = u.spec.h
    diffs = _forward_differences(u)
    norm = np.sqrt(sum(d * d for d in diffs)) / h
    total = math.fsum((norm**p).ravel()) * h**u.dim
    return total ** (1.0 / p)


def bv_seminorm(u: GridFunction) -> float:
    """Anisotropic discrete total variation ``sum_a sum_i |u_{i+e_a} - u_i| h^(N-1)``."""
    diffs = _forward_differences(u)
    return math.fsum(math.fsum(np.abs(d).ravel()) for d in diffs) * u.spec.h ** (u.dim - 1)
