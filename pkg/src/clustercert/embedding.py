"""The constant ``C(N, s, p) = (int_{Q_2} |z|^-sigma dz)^(1/p)``, ``sigma = N + p*s - p``.

Three independent evaluations are provided:

``quadrature``
    Dyadic shells about the origin. With ``A = (0,1)^N \\ (0,1/2]^N`` the
    unit corner cube is the disjoint union of ``2^-j A`` and the integrand is
    homogeneous of degree ``-sigma``, so the integral over ``Q_2`` equals
    ``2^N * I_A / (1 - 2^-(N - sigma))``. ``I_A`` has a smooth integrand and
    is computed by tensor Gauss-Legendre, refined until two successive
    orders agree.
``ball-bound``
    Closed form of the same integral over the ball of radius ``sqrt(N)``,
    which contains ``Q_2``; an upper bound.
``monte-carlo``
    Radially importance-sampled hit-or-miss estimate with a standard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ClusterCertError
from .seminorms import FractionalParams

METHODS = ("quadrature", "ball-bound", "monte-carlo")


@dataclass(frozen=True)
class EmbeddingConstant:
    dim: int
    params: FractionalParams
    sigma: float
    value: float
    method: str
    integral: float
    stderr: float | None = None  # of ``integral``
    value_stderr: float | None = None

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "s": self.params.s,
            "p": self.params.p,
            "sigma": self.sigma,
            "value": self.value,
            "method": self.method,
            "integral": self.integral,
            "stderr": self.stderr,
            "value_stderr": self.value_stderr,
        }


def kernel_sigma(dim: int, params: FractionalParams) -> float:
    return dim + params.p * params.s - params.p


def unit_ball_volume(dim: int) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


def ball_bound_integral(dim: int, sigma: float) -> float:
    """``int_{B_sqrt(N)} |z|^-sigma dz = N w_N sqrt(N)^(N-sigma) / (N-sigma)``."""
    return dim * unit_ball_volume(dim) * math.sqrt(dim) ** (dim - sigma) / (dim - sigma)


def _shell_integral(dim: int, sigma: float, order: int, pieces: int) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    # composite rule on [0, 1/2] split into `pieces` panels
    w = pieces
    panel = 0.5 / w
    x1 = (np.arange(w)[:, None] * panel + (nodes[None, :] + 1) * panel / 2).ravel()
    w1 = np.tile(weights * panel / 2, w)
    total = []
    for corner in product((0.0, 0.5), repeat=dim):
        if not any(corner):
            continue
        grids = np.meshgrid(*[x1 + c for c in corner], indexing="ij")
        r2 = sum(g * g for g in grids)
        wts = w1
        for _ in range(dim - 1):
            wts = np.multiply.outer(wts, w1)
        total.append(float(np.sum(wts * r2 ** (-sigma / 2))))
    return math.fsum(total)


def quadrature_integral(dim: int, sigma: float, rtol: float = 1e-10, max_order: int = 64) -> float:
    if not sigma < dim:
        raise ClusterCertError(f"integral diverges for sigma={sigma} >= N={dim}")
    pieces = 2
    prev = None
    order = 4
    while True:
        shell = _shell_integral(dim, sigma, order, pieces)
        est = 2**dim * shell / (1.0 - 2.0 ** (-(dim - sigma)))
        if prev is not None and abs(est - prev) <= rtol * abs(est):
            return est
        if order >= max_order:
            raise ClusterCertError(f"quadrature did not reach rtol={rtol} (last change {abs(est - prev) / est:.2e})")
        prev = est
        order *= 2


def monte_carlo_integral(dim: int, sigma: float, samples: int = 1_000_000, seed: int = 0) -> tuple[float, float]:
    """Estimate and standard error.

    ``z = rho * theta`` with ``theta`` uniform on the sphere and ``rho`` drawn
    with density proportional to ``rho^(N-1-sigma)`` on ``[0, sqrt(N)]``. The
    importance weight of every sample is then the ball-bound integral, and
    the estimator reduces to ``ball * P(z in Q_2)``, which has finite variance
    for every ``sigma < N`` (plain uniform sampling on ``Q_2`` does not once
    ``sigma >= N/2``).
    """
    rng = np.random.default_rng(seed)
    radius = math.sqrt(dim)
    ball = ball_bound_integral(dim, sigma)
    hits = 0
    done = 0
    batch = 250_000
    while done < samples:
        n = min(batch, samples - done)
        theta = rng.standard_normal((n, dim))
        theta /= np.linalg.norm(theta, axis=1)[:, None]
        rho = radius * rng.random(n) ** (1.0 / (dim - sigma))
        z = theta * rho[:, None]
        hits += int(np.count_nonzero(np.all(np.abs(z) < 1.0, axis=1)))
        done += n
    frac = hits / samples
    return ball * frac, ball * math.sqrt(frac * (1 - frac) / samples)


def embedding_constant(
    dim: int,
    params: FractionalParams,
    method: str = "quadrature",
    *,
    samples: int = 1_000_000,
    seed: int = 0,
) -> EmbeddingConstant:
    if dim < 1:
        raise ClusterCertError("dimension must be >= 1")
    sigma = kernel_sigma(dim, params)
    stderr = None
    if method == "quadrature":
        integral = quadrature_integral(dim, sigma)
    elif method == "ball-bound":
        integral = ball_bound_integral(dim, sigma)
    elif method == "monte-carlo":
        integral, stderr = monte_carlo_integral(dim, sigma, samples, seed)
    else:
        raise ClusterCertError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    value = integral ** (1.0 / params.p)
    value_stderr = None
    if stderr is not None:
        # delta method for the 1/p power
        value_stderr = value * stderr / (params.p * integral)
    return EmbeddingConstant(dim, params, sigma, value, method, integral, stderr, value_stderr)
