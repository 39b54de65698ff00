"""Self-normalised two-sample relevant test of H0: ||theta_1 - theta_2||^2 <= delta."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InputError
from .gaussmc import RngSpec, sn_limit_sample, upper_quantile
from .kernels import KernelSpec
from .sample import as_sample
from .useq import pair_sums

#: default resolution of the simulated limit functional
DEFAULT_W_GRID = 2048


@dataclass(frozen=True)
class RelevantTestConfig:
    delta: float
    alpha: float = 0.05
    lambda_grid_size: int | None = None
    w_paths: int = 100_000
    w_grid_size: int = DEFAULT_W_GRID
    rng: RngSpec = field(default_factory=lambda: RngSpec(0))

    def __post_init__(self):
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise InputError(f"delta must be finite and non-negative, got {self.delta}")
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.lambda_grid_size is not None and self.lambda_grid_size < 8:
            raise InputError(f"lambda_grid_size must be at least 8, got {self.lambda_grid_size}")


@dataclass(frozen=True)
class SNReport:
    S: float
    D1: float
    V: float
    q: float
    reject: bool
    N: float
    degenerate: bool = False


def default_lambda_grid(n1: int, n2: int, m: int | None = None) -> np.ndarray:
    m = min(n1, n2) if m is None else m
    return np.arange(1, m + 1) / m


def _check_grid(lambda_grid) -> np.ndarray:
    grid = np.asarray(lambda_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise InputError("lambda grid is empty")
    if np.any(grid <= 0) or np.any(grid > 1) or np.any(np.diff(grid) <= 0):
        raise InputError("lambda grid must be strictly increasing inside (0, 1]")
    if grid[-1] != 1.0:
        raise InputError("lambda grid must end at 1")
    return grid


def _counts(grid, n):
    # floor(lambda * n) with a guard against j/m * n landing just below an integer
    return np.floor(grid * n + 1e-9).astype(int)


def distance_process(sample_x, sample_y, spec: KernelSpec, lambda_grid: Sequence[float]) -> np.ndarray:
    """D(lambda) = ||U^(1)_{floor(lambda n1)} - U^(2)_{floor(lambda n2)}||^2 on the grid.

    D is zero wherever either prefix holds fewer than two observations.
    """
    x, y = as_sample(sample_x), as_sample(sample_y)
    if x.p != y.p:
        raise InputError(f"samples have different dimensions ({x.p} vs {y.p})")
    grid = _check_grid(lambda_grid)
    k1, k2 = _counts(grid, x.n), _counts(grid, y.n)
    valid = np.minimum(k1, k2) >= 2
    out = np.zeros(grid.size)
    if not valid.any():
        return out
    px, py = pair_sums(x, spec).prefix, pair_sums(y, spec).prefix
    a, b = k1[valid], k2[valid]
    diff = (px[a] / (a * (a - 1) / 2.0)[:, None] - py[b] / (b * (b - 1) / 2.0)[:, None]).astype(float)
    out[valid] = np.einsum("ij,ij->i", diff, diff)
    return out


def self_normalizer(D, lambda_grid, N: float) -> float:
    """V^2 as a left-endpoint Riemann sum of [lambda N (D(lambda) - D(1))]^2 over the grid.

    The cell [0, lambda_1] contributes nothing since D(0) is defined as zero
    and the integrand carries the factor lambda.
    """
    D = np.asarray(D, dtype=float).reshape(-1)
    grid = _check_grid(lambda_grid)
    if D.size != grid.size:
        raise InputError(f"D has {D.size} values for a grid of {grid.size} points")
    f = (grid * N * (D - D[-1])) ** 2
    widths = np.diff(grid)
    return float(np.sum(widths * f[:-1]))


@lru_cache(maxsize=16)
def sn_critical_value(alpha: float, w_paths: int, w_grid_size: int, rng: RngSpec, threads: int = 1) -> float:
    """Simulated (1 - alpha)-quantile of the self-normalised limit.  Cached per argument set."""
    return upper_quantile(sn_limit_sample(w_paths, w_grid_size, rng, threads=threads), alpha)


def run_relevant_test(
    sample_x, sample_y, spec: KernelSpec, cfg: RelevantTestConfig, *, critical_value: float | None = None,
    threads: int = 1,
) -> SNReport:
    x, y = as_sample(sample_x), as_sample(sample_y)
    if x.n < 4 or y.n < 4:
        raise InputError(f"both samples need at least 4 observations, got {x.n} and {y.n}")
    grid = default_lambda_grid(x.n, y.n, cfg.lambda_grid_size)
    D = distance_process(x, y, spec, grid)
    N = x.n * y.n / (x.n + y.n)
    V = math.sqrt(self_normalizer(D, grid, N))
    D1 = float(D[-1])
    numerator = N * (D1 - cfg.delta)
    degenerate = V == 0.0
    if degenerate:
        S = math.copysign(math.inf, numerator) if numerator != 0 else 0.0
    else:
        S = numerator / V
    if critical_value is None:
        critical_value = sn_critical_value(cfg.alpha, cfg.w_paths, cfg.w_grid_size, cfg.rng, threads)
    return SNReport(S=S, D1=D1, V=V, q=critical_value, reject=bool(S > critical_value), N=N, degenerate=degenerate)
