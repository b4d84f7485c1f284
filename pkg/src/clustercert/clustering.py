"""Hypothesis checks, the partition classifier and the certificate search.

Every level comparison is exact bookkeeping on cell counts. Thresholds that
involve a real parameter (``alpha``, ``delta``) are compared with
:class:`fractions.Fraction`, so the counting bound for ``#F_k^+`` holds
without rounding exceptions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ClusterCertError, SearchInfeasibleError
from .geometry import GridFunction, block_view, subcube, subcube_indices
from .seminorms import FractionalParams, gagliardo


def _open_unit(name, x):
    x = float(x)
    if not 0.0 < x < 1.0:
        raise ClusterCertError(f"{name} must lie in (0, 1), got {x}")
    return x


@dataclass(frozen=True)
class ClusterQuery:
    c: float
    alpha: float
    gamma: float
    delta: float
    lam: float
    params: FractionalParams

    def __post_init__(self):
        c, gamma = float(self.c), float(self.gamma)
        if not (c > 0 and math.isfinite(c)):
            raise ClusterCertError(f"level c must be positive, got {self.c}")
        if not (gamma > 0 and math.isfinite(gamma)):
            raise ClusterCertError(f"gamma must be positive, got {self.gamma}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "alpha", _open_unit("alpha", self.alpha))
        object.__setattr__(self, "delta", _open_unit("delta", self.delta))
        object.__setattr__(self, "lam", _open_unit("lambda", self.lam))

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "delta": self.delta,
            "lambda": self.lam,
            "s": self.params.s,
            "p": self.params.p,
        }


def superlevel_count(u: GridFunction, c: float) -> int:
    return int(np.count_nonzero(u.values > c))


def superlevel_measure(u: GridFunction, c: float) -> float:
    """``|{u > c}|`` with each cell carrying the value at its midpoint."""
    return superlevel_count(u, c) * u.spec.cell_volume


def check_hypothesis_a(u: GridFunction, c: float, alpha: float) -> tuple[bool, float]:
    """``|{u > c}| > alpha r^N``; returns the verdict and the measured fraction."""
    alpha = _open_unit("alpha", alpha)
    count = superlevel_count(u, c)
    n = u.spec.n_cells
    return count > Fraction(alpha) * n, count / n


def measured_gamma(u: GridFunction, c: float, params: FractionalParams, workers: int | None = None) -> float:
    r, n = u.cube.side, u.dim
    return gagliardo(u, params, workers) / (c * r ** ((n - params.p * params.s) / params.p))


def check_hypothesis_b(u: GridFunction, query: ClusterQuery, workers: int | None = None) -> tuple[bool, float]:
    g = measured_gamma(u, query.c, query.params, workers)
    return g <= query.gamma, g


def _block_counts(u: GridFunction, level: float, k: int) -> np.ndarray:
    """Superlevel counts per subcube, flattened in lexicographic subcube order."""
    blocks = block_view(u, k)
    n = u.dim
    return np.count_nonzero(blocks > level, axis=tuple(range(n, 2 * n))).ravel()


@dataclass
class PartitionReport:
    k: int
    plus_indices: list
    plus_count: int
    clu1_lhs: float
    clu1_rhs: float
    clu1_holds: bool
    counts: np.ndarray = field(repr=False)
    block_cells: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("counts")
        d["plus_indices"] = [list(j) for j in self.plus_indices]
        return d


def classify_partition(u: GridFunction, c: float, alpha: float, k: int) -> PartitionReport:
    """Split the ``k**N`` aligned subcubes into ``F_k^+`` (at least ``alpha/2`` of
    the cells strictly above ``c``) and ``F_k^-``."""
    alpha = _open_unit("alpha", alpha)
    counts = _block_counts(u, c, k)
    cells = (u.m // k) ** u.dim
    a = Fraction(alpha)
    is_plus = [Fraction(int(n)) >= a / 2 * cells for n in counts]
    idx = subcube_indices(u.dim, k)
    plus = [j for j, flag in zip(idx, is_plus) if flag]
    rhs = a / (2 - a) * k**u.dim
    return PartitionReport(
        k=k,
        plus_indices=plus,
        plus_count=len(plus),
        clu1_lhs=float(len(plus)),
        clu1_rhs=float(rhs),
        clu1_holds=len(plus) > rhs,
        counts=counts,
        block_cells=cells,
    )


def partition_csv(u: GridFunction, query: ClusterQuery, reports) -> str:
    """One row per subcube: depth, index, counts at ``c`` and ``lambda*c``, class."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "index", "count_c", "count_lambda_c", "cells", "class"])
    for rep in reports:
        low = _block_counts(u, query.lam * query.c, rep.k)
        plus = set(rep.plus_indices)
        for j, n_c, n_l in zip(subcube_indices(u.dim, rep.k), rep.counts, low):
            w.writerow([rep.k, ":".join(map(str, j)), int(n_c), int(n_l), rep.block_cells, "+" if j in plus else "-"])
    return buf.getvalue()


def depth_bound_terms(query: ClusterQuery, dim: int) -> dict:
    """Factors of ``B`` in the terminal inequality ``k^(ps) <= B`` of the case-(ii) argument."""
    p, s = query.params.p, query.params.s
    a, lam, d, g = query.alpha, query.lam, query.delta, query.gamma
    terms = {
        "four_pow_p": 4.0**p,
        "two_minus_alpha": 2.0 - a,
        "dim_factor": dim ** ((dim + p * s) / 2),
        "gamma_pow_p": g**p,
        "alpha_pow_p_plus_1": a ** (p + 1),
        "one_minus_lambda_pow_p": (1.0 - lam) ** p,
        "delta": d,
    }
    terms["numerator"] = terms["four_pow_p"] * terms["two_minus_alpha"] * terms["dim_factor"] * terms["gamma_pow_p"]
    terms["denominator"] = terms["alpha_pow_p_plus_1"] * terms["one_minus_lambda_pow_p"] * terms["delta"]
    terms["B"] = terms["numerator"] / terms["denominator"]
    return terms


def _log_bound(query: ClusterQuery, dim: int) -> float:
    p, s = query.params.p, query.params.s
    a, lam = query.alpha, query.lam
    return (
        p * math.log(4.0)
        + math.log(2.0 - a)
        + (dim + p * s) / 2 * math.log(dim)
        + p * math.log(query.gamma)
        - (p + 1) * math.log(a)
        - p * math.log1p(-lam)
        - math.log(query.delta)
    )


def k_star(query: ClusterQuery, dim: int) -> int:
    """Smallest ``k >= 2`` with ``k^(ps) > B``; the case-(i) depth never exceeds it."""
    if dim < 1:
        raise ClusterCertError("dimension must be >= 1")
    ps = query.params.p * query.params.s
    try:
        root = depth_bound_terms(query, dim)["B"] ** (1.0 / ps)
    except OverflowError:
        root = math.inf
    if math.isfinite(root) and root < 2.0**62:
        return max(2, math.floor(root) + 1)
    import mpmath

    with mpmath.workdps(50):
        root = mpmath.exp(mpmath.mpf(_log_bound(query, dim)) / ps)
        return max(2, int(mpmath.floor(root)) + 1)


def eta_lower_bound(query: ClusterQuery, dim: int) -> float:
    return 1.0 / k_star(query, dim)


@dataclass
class ClusterCertificate:
    found: bool
    k: int | None
    eta: float | None
    index: tuple | None
    x1: tuple | None
    fraction: float | None
    checked_ks: list
    skipped_ks: list
    k_star: int
    alpha_measured: float
    gamma_measured: float
    hypothesis_a: bool
    hypothesis_b: bool
    plus_counts: dict
    best_fraction: float
    query: dict
    reduction: dict | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["index"] = list(self.index) if self.index is not None else None
        d["x1"] = list(self.x1) if self.x1 is not None else None
        d["plus_counts"] = {str(k): v for k, v in self.plus_counts.items()}
        if self.reduction is None:
            d.pop("reduction")
        return d


def search_depths(m: int, kmax: int) -> tuple[list[int], list[int]]:
    """Admissible depths (divisors of ``m`` in ``[2, kmax]``) and the skipped non-divisors up to ``min(kmax, m)``."""
    upper = min(kmax, m)
    ks = [k for k in range(2, upper + 1) if m % k == 0]
    skipped = [k for k in range(2, upper + 1) if m % k]
    return ks, skipped


def cluster_search(
    u: GridFunction,
    query: ClusterQuery,
    workers: int | None = None,
    collect_reports: list | None = None,
) -> ClusterCertificate:
    """Coarsest-first search for a subcube of ``F_k^+`` whose strict superlevel
    fraction at ``lambda*c`` exceeds ``1 - delta``.

    Depths run over divisors of ``m`` in ``[2, k_star]`` in increasing order,
    subcubes in lexicographic order. The hypothesis checks are recorded but do
    not stop the search. If ``collect_reports`` is a list, every partition
    report examined is appended to it.
    """
    kst = k_star(query, u.dim)
    ks, skipped = search_depths(u.m, kst)
    if not ks:
        raise SearchInfeasibleError(
            f"no divisor of m={u.m} lies in [2, {kst}]; use a finer grid with a composite m"
        )
    ok_a, alpha_measured = check_hypothesis_a(u, query.c, query.alpha)
    ok_b, gamma_measured = check_hypothesis_b(u, query, workers)
    lam_c = query.lam * query.c
    need = 1 - Fraction(query.delta)
    plus_counts = {}
    checked = []
    best = 0.0
    for k in ks:
        rep = classify_partition(u, query.c, query.alpha, k)
        if collect_reports is not None:
            collect_reports.append(rep)
        checked.append(k)
        plus_counts[k] = rep.plus_count
        if not rep.plus_indices:
            continue
        low = _block_counts(u, lam_c, k)
        cells = rep.block_cells
        order = {j: q for q, j in enumerate(subcube_indices(u.dim, k))}
        for j in rep.plus_indices:
            n_low = int(low[order[j]])
            frac = n_low / cells
            best = max(best, frac)
            if n_low > need * cells:
                return ClusterCertificate(
                    found=True,
                    k=k,
                    eta=1.0 / k,
                    index=j,
                    x1=subcube(u.cube, k, j).center,
                    fraction=frac,
                    checked_ks=checked,
                    skipped_ks=[q for q in skipped if q < k],
                    k_star=kst,
                    alpha_measured=alpha_measured,
                    gamma_measured=gamma_measured,
                    hypothesis_a=ok_a,
                    hypothesis_b=ok_b,
                    plus_counts=plus_counts,
                    best_fraction=best,
                    query=query.to_dict(),
                )
    return ClusterCertificate(
        found=False,
        k=None,
        eta=None,
        index=None,
        x1=None,
        fraction=None,
        checked_ks=checked,
        skipped_ks=skipped,
        k_star=kst,
        alpha_measured=alpha_measured,
        gamma_measured=gamma_measured,
        hypothesis_a=ok_a,
        hypothesis_b=ok_b,
        plus_counts=plus_counts,
        best_fraction=best,
        query=query.to_dict(),
    )
