"""Retrospective single change-point detection with the first-versus-last U-statistic CUSUM."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .gaussmc import RngSpec, bridge_grid_size, brownian_bridge_sups, sup_quantile
from .kernels import KernelSpec
from .sample import SeqPath, as_sample
from .useq import PairSums, _projections_from_sums, covariance_estimate, pair_sums

DEFAULT_BRIDGE_PATHS = 20_000


def _cusum_from_sums(sums: PairSums) -> SeqPath:
    n = sums.n
    k = np.arange(2, n - 1)
    pre = sums.prefix[k] / (k * (k - 1) / 2.0)[:, None]
    m = n - k
    post = sums.suffix[k] / (m * (m - 1) / 2.0)[:, None]
    weight = math.sqrt(n) * (k / n) * (1.0 - k / n)
    return SeqPath((weight[:, None] * (pre - post)).astype(float), 2, n - 2, n)


def cusum_process(sample, spec: KernelSpec) -> SeqPath:
    """C_n(k) = sqrt(n) (k/n)(1 - k/n) (U_k - U*_k) for k = 2..n-2.

    U_k uses observations 1..k and U*_k observations k+1..n; both come out of
    one pass over the pairs.
    """
    sample = as_sample(sample)
    if sample.n < 4:
        raise InputError(f"CUSUM needs at least 4 observations, got {sample.n}")
    return _cusum_from_sums(pair_sums(sample, spec))


def cusum_statistic(path: SeqPath) -> tuple[float, int]:
    """(max_k ||C_n(k)||, smallest maximising k)."""
    if len(path) == 0:
        raise InputError("empty CUSUM path")
    norms = path.norms()
    pos = int(np.argmax(norms))
    return float(norms[pos]), path.k_start + pos


@dataclass(frozen=True)
class CusumResult:
    path: SeqPath
    T_n: float
    k_hat: int
    tau_hat: float
    q: float
    reject: bool
    bridge_paths_used: int
    lambda_min: float
    clipped_mass: float


def detect_change(
    sample, spec: KernelSpec, alpha: float = 0.05, n_paths: int = DEFAULT_BRIDGE_PATHS,
    rng: RngSpec = RngSpec(0), threads: int = 1,
) -> CusumResult:
    """CUSUM test with critical value from bridges scaled by the jackknife covariance root."""
    sample = as_sample(sample)
    if sample.n < 5:
        raise InputError(f"change-point detection needs at least 5 observations, got {sample.n}")
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    if n_paths < 1000:
        raise InputError(f"need at least 1000 bridge paths, got {n_paths}")
    sums = pair_sums(sample, spec)
    path = _cusum_from_sums(sums)
    t_n, k_hat = cusum_statistic(path)
    cov = covariance_estimate(_projections_from_sums(sums))
    sups = brownian_bridge_sups(cov.root, bridge_grid_size(sample.n), n_paths, rng, threads=threads)
    q = sup_quantile(sups, alpha)
    return CusumResult(
        path=path, T_n=t_n, k_hat=k_hat, tau_hat=k_hat / sample.n, q=q, reject=bool(t_n > q),
        bridge_paths_used=n_paths, lambda_min=cov.min_eigenvalue, clipped_mass=cov.clipped_mass,
    )


@dataclass(frozen=True)
class DriftSpec:
    """Pre-break mean mu1, post-break mean mu2, cross mean mu12 = E h(X, Y) and break fraction."""

    mu1: np.ndarray
    mu2: np.ndarray
    mu12: np.ndarray
    tau_star: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "mu12"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        if not (self.mu1.shape == self.mu2.shape == self.mu12.shape):
            raise InputError("mu1, mu2 and mu12 must share one dimension")
        if not 0 < self.tau_star < 1:
            raise InputError(f"tau_star must lie in (0, 1), got {self.tau_star}")
        if not np.linalg.norm(self.mu2 - self.mu1) > 0:
            raise InputError("mu2 must differ from mu1")

    @property
    def delta(self) -> np.ndarray:
        return self.mu2 - self.mu1


def drift_V(spec: DriftSpec, t: float) -> float:
    """Deterministic limit of the rescaled CUSUM norm under a single break."""
    if not 0 < t < 1:
        raise InputError(f"t must lie in (0, 1), got {t}")
    tau = spec.tau_star
    delta = spec.delta
    size = np.linalg.norm(delta)
    if t <= tau:
        inner = (1 - tau) ** 2 * (-delta / size) + 2 * (tau - t) * (1 - tau) * (spec.mu1 - spec.mu12) / size
        return float(np.linalg.norm(t / (1 - t) * inner))
    inner = tau**2 * (-delta / size) + 2 * tau * (t - tau) * (spec.mu12 - spec.mu2) / size
    return float(np.linalg.norm((1 - t) / t * inner))


def check_geometric_constraints(spec: DriftSpec) -> bool:
    """Whether both strict inequalities guaranteeing a unique drift maximum at tau* hold."""
    delta = spec.delta
    energy = delta @ delta
    tau = spec.tau_star
    first = 2 * tau * delta @ (spec.mu1 - spec.mu12) < energy
    second = 2 * (1 - tau) * delta @ (spec.mu12 - spec.mu2) < energy
    return bool(first and second)
