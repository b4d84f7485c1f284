"""Analytic test-function families and the standard sampling corpus."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from .errors import ClusterCertError
from .geometry import GridFunction, GridSpec

FAMILIES = ("constant", "linear", "bump", "tanh-plateau", "indicator-halfspace", "random-trig")


def _vec(params, key, dim, default=None):
    raw = params.get(key, default)
    if raw is None:
        raise ClusterCertError(f"missing parameter {key!r}")
    arr = np.atleast_1d(np.asarray(raw, dtype=np.float64))
    if arr.size == 1 and dim > 1:
        arr = np.full(dim, arr[0])
    if arr.size != dim:
        raise ClusterCertError(f"parameter {key!r} must have {dim} components, got {arr.size}")
    return arr


def _constant(params, x):
    return np.full(x.shape[0], float(params.get("value", 0.0)))


def _linear(params, x):
    a = _vec(params, "coeffs", x.shape[1])
    return x @ a + float(params.get("offset", 0.0))


def _bump(params, x):
    center = _vec(params, "center", x.shape[1], 0.0)
    width = float(params.get("width", 0.25))
    if width <= 0:
        raise ClusterCertError("bump width must be positive")
    r2 = np.sum((x - center) ** 2, axis=1)
    return float(params.get("height", 1.0)) * np.exp(-r2 / (2 * width**2)) + float(
        params.get("offset", 0.0)
    )


def _tanh_plateau(params, x):
    normal = _vec(params, "normal", x.shape[1])
    steep = float(params.get("steepness", 10.0))
    t = x @ normal - float(params.get("offset", 0.0))
    return float(params.get("height", 1.0)) * 0.5 * (1.0 + np.tanh(steep * t))


def _indicator_halfspace(params, x):
    axis = int(params.get("axis", 0))
    if not 0 <= axis < x.shape[1]:
        raise ClusterCertError(f"halfspace axis {axis} out of range for N={x.shape[1]}")
    thr = float(params.get("threshold", 0.0))
    low, high = float(params.get("low", 0.0)), float(params.get("high", 1.0))
    return np.where(x[:, axis] > thr, high, low)


def random_trig_terms(seed: int, terms: int, dim: int):
    """Integer frequencies, phases and weights drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    freqs = rng.integers(-3, 4, size=(terms, dim))
    freqs[np.all(freqs == 0, axis=1), 0] = 1
    phases = rng.uniform(0.0, 2 * math.pi, size=terms)
    weights = rng.standard_normal(terms) / math.sqrt(terms)
    return freqs, phases, weights


def _random_trig(params, x):
    terms = int(params.get("terms", 4))
    if terms < 1:
        raise ClusterCertError("random-trig needs at least one term")
    freqs, phases, weights = random_trig_terms(int(params.get("seed", 0)), terms, x.shape[1])
    arg = 2 * math.pi * (x @ freqs.T.astype(np.float64)) + phases
    return float(params.get("amplitude", 1.0)) * (np.cos(arg) @ weights) + float(
        params.get("offset", 0.0)
    )


_EVALUATORS: dict[str, Callable[[Mapping[str, Any], np.ndarray], np.ndarray]] = {
    "constant": _constant,
    "linear": _linear,
    "bump": _bump,
    "tanh-plateau": _tanh_plateau,
    "indicator-halfspace": _indicator_halfspace,
    "random-trig": _random_trig,
}


@dataclass(frozen=True)
class FunctionSpec:
    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in _EVALUATORS:
            raise ClusterCertError(
                f"unknown function family {self.family!r}; expected one of {', '.join(FAMILIES)}"
            )
        if not isinstance(self.params, Mapping):
            raise ClusterCertError("function params must be a mapping")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Evaluate at an ``(n, N)`` array of points."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.asarray(_EVALUATORS[self.family](self.params, x), dtype=np.float64)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FunctionSpec":
        if "family" not in data:
            raise ClusterCertError("function spec needs a 'family' field")
        return cls(str(data["family"]), dict(data.get("params", {})))


def sample(fspec: FunctionSpec, spec: GridSpec) -> GridFunction:
    values = fspec(spec.centers())
    if not np.all(np.isfinite(values)):
        raise ClusterCertError(f"{fspec.family} produced non-finite samples")
    return GridFunction(spec, values)


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    fspec: FunctionSpec
    kind: str  # "smooth", "lipschitz" or "bv"
    level: float  # a level c > 0 with a nontrivial superlevel set on Q_1(0)


def default_corpus(dim: int) -> list[CorpusEntry]:
    """The fixed test corpus on the unit cube centred at the origin."""
    e0 = [1.0] + [0.0] * (dim - 1)
    diag = [1.0 / math.sqrt(dim)] * dim

    def at(*xs):
        return [xs[a % len(xs)] for a in range(dim)]

    out = [
        CorpusEntry("bump-center", FunctionSpec("bump", {"center": at(0.0), "width": 0.2, "height": 2.0}), "smooth", 1.0),
        CorpusEntry("bump-corner", FunctionSpec("bump", {"center": at(0.25, -0.2), "width": 0.15, "height": 1.5}), "smooth", 0.5),
        CorpusEntry("bump-wide", FunctionSpec("bump", {"center": at(-0.1, 0.1), "width": 0.35, "height": 1.0}), "smooth", 0.6),
        CorpusEntry("bump-narrow", FunctionSpec("bump", {"center": at(-0.3, 0.3), "width": 0.08, "height": 3.0}), "smooth", 1.0),
        CorpusEntry("bump-offset", FunctionSpec("bump", {"center": at(0.3, 0.25), "width": 0.25, "height": 1.0, "offset": 0.2}), "smooth", 0.8),
    ]
    for seed in range(1, 6):
        fs = FunctionSpec("random-trig", {"seed": seed, "terms": 4, "amplitude": 1.0, "offset": 0.25})
        out.append(CorpusEntry(f"trig-{seed}", fs, "smooth", 0.5))
    out += [
        CorpusEntry("linear-axis", FunctionSpec("linear", {"coeffs": e0, "offset": 0.5}), "lipschitz", 0.5),
        CorpusEntry("linear-oblique", FunctionSpec("linear", {"coeffs": at(1.0, -0.5), "offset": 0.2}), "lipschitz", 0.3),
        CorpusEntry("tanh-axis", FunctionSpec("tanh-plateau", {"normal": e0, "offset": 0.1, "steepness": 8.0, "height": 2.0}), "lipschitz", 1.0),
        CorpusEntry("tanh-diag", FunctionSpec("tanh-plateau", {"normal": diag, "offset": -0.1, "steepness": 12.0, "height": 1.0}), "lipschitz", 0.5),
        CorpusEntry("halfspace-axis0", FunctionSpec("indicator-halfspace", {"axis": 0, "threshold": 0.0, "low": 0.0, "high": 2.0}), "bv", 1.0),
        CorpusEntry("halfspace-last", FunctionSpec("indicator-halfspace", {"axis": dim - 1, "threshold": 0.2, "low": -1.0, "high": 1.0}), "bv", 0.5),
    ]
    return out


def select_corpus(dim: int, kinds=None, names=None) -> list[CorpusEntry]:
    entries = default_corpus(dim)
    if kinds:
        entries = [e for e in entries if e.kind in set(kinds)]
    if names:
        entries = [e for e in entries if e.name in set(names)]
    return entries
