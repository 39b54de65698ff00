"""Full and sequential U-statistics, jackknife projections and the projection covariance.

All statistics here are read off a single pass over the n(n-1)/2 observation
pairs (:func:`pair_sums`), which records for every observation the kernel sum
against all earlier observations and against all later ones.  Prefix sums of
the former give the U-statistic of the first k observations, suffix sums of the
latter the U-statistic of the last n - k, and their sum the leave-one-in row
totals used by the jackknife.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegeneratePairError, InputError
from .gaussmc import psd_sqrt
from .kernels import KernelSpec, kernel_rows
from .sample import Sample, SeqPath, as_sample

__all__ = [
    "CovarianceEstimate",
    "PairSums",
    "Sample",
    "SeqPath",
    "covariance_estimate",
    "full_ustat",
    "jackknife_projections",
    "pair_sums",
    "sequential_T",
    "sequential_U",
]


class DegenerateJackknifeWarning(UserWarning):
    """Jackknife projections are identically zero (n = 2)."""


@dataclass(frozen=True)
class PairSums:
    """Per-observation kernel sums over earlier (``lower``) and later (``upper``) partners.

    ``lower[j]`` is the sum of h(X_i, X_j) over i < j and ``upper[i]`` the sum
    over j > i (0-based rows).
    """

    lower: np.ndarray
    upper: np.ndarray

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def d(self) -> int:
        return self.lower.shape[1]

    @cached_property
    def prefix(self) -> np.ndarray:
        """``prefix[k]`` = sum of h over pairs inside the first k observations, k = 0..n."""
        out = np.zeros((self.n + 1, self.d), dtype=np.longdouble)
        np.cumsum(self.lower, axis=0, dtype=np.longdouble, out=out[1:])
        return out

    @cached_property
    def suffix(self) -> np.ndarray:
        """``suffix[k]`` = sum of h over pairs inside observations k+1..n, k = 0..n."""
        out = np.zeros((self.n + 1, self.d), dtype=np.longdouble)
        np.cumsum(self.upper[::-1], axis=0, dtype=np.longdouble, out=out[-2::-1])
        return out

    def row_totals(self) -> np.ndarray:
        return self.lower + self.upper


def pair_sums(sample, spec: KernelSpec) -> PairSums:
    """Evaluate the kernel once on every unordered pair and accumulate per-row sums."""
    x = as_sample(sample).data
    n = x.shape[0]
    d = spec.dimension(x.shape[1])
    lower = np.zeros((n, d))
    upper = np.zeros((n, d), dtype=np.longdouble)
    for j in range(1, n):
        try:
            h = kernel_rows(spec, x[j], x[:j])
        except DegeneratePairError as err:
            i = err.index
            raise DegeneratePairError(
                f"{err} (observations {i + 1} and {j + 1})", index=err.index, pair=(i, j)
            ) from None
        lower[j] = h.sum(axis=0)
        upper[:j] += h
    return PairSums(lower, upper.astype(float))


def _pairs(k):
    return k * (k - 1) / 2.0


def full_ustat(sample, spec: KernelSpec) -> np.ndarray:
    ps = pair_sums(sample, spec)
    return (ps.prefix[-1] / _pairs(ps.n)).astype(float)


def sequential_U(sums: PairSums) -> SeqPath:
    """U_k for k = 2..n from precomputed pair sums."""
    n = sums.n
    k = np.arange(2, n + 1)
    values = (sums.prefix[2:] / _pairs(k)[:, None]).astype(float)
    return SeqPath(values, 2, n, n)


def sequential_T(sample, spec: KernelSpec, theta) -> SeqPath:
    """The scaled sequential process T_k = (k / (2 sqrt(n))) (U_k - theta), k = 2..n.

    ``theta`` is the centring vector; pass the full-sample U_n as a plug-in
    when the true value is unknown.
    """
    sample = as_sample(sample)
    theta = np.asarray(theta, dtype=float).reshape(-1)
    d = spec.dimension(sample.p)
    if theta.shape != (d,):
        raise InputError(f"theta has dimension {theta.size}, kernel produces {d}")
    sums = pair_sums(sample, spec)
    n = sums.n
    k = np.arange(2, n + 1)
    centred = sums.prefix[2:] - _pairs(k)[:, None] * theta
    values = (centred / (np.sqrt(n) * (k - 1))[:, None]).astype(float)
    return SeqPath(values, 2, n, n)


def _projections_from_sums(sums: PairSums) -> np.ndarray:
    n = sums.n
    if n == 2:
        warnings.warn("jackknife projections are identically zero for n = 2", DegenerateJackknifeWarning)
    u_n = (sums.prefix[-1] / _pairs(n)).astype(float)
    return sums.row_totals() / (n - 1) - u_n


def jackknife_projections(sample, spec: KernelSpec) -> np.ndarray:
    """Empirical first-order projections, one row per observation.

    Row i is the mean of h(X_i, X_j) over j != i minus the full-sample U-statistic.
    """
    return _projections_from_sums(pair_sums(sample, spec))


@dataclass(frozen=True)
class CovarianceEstimate:
    sigma: np.ndarray
    root: np.ndarray
    clipped_mass: float

    @property
    def d(self) -> int:
        return self.sigma.shape[0]

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.sigma)[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.sigma))


def covariance_estimate(projections) -> CovarianceEstimate:
    """Average outer product of the jackknife projections with its PSD square root."""
    g = np.asarray(projections, dtype=float)
    if g.ndim != 2 or g.shape[0] < 2:
        raise InputError(f"projections must be an n x d matrix with n >= 2, got shape {g.shape}")
    if not np.isfinite(g).all():
        raise InputError("projections contain non-finite values")
    sigma = g.T @ g / g.shape[0]
    sigma = (sigma + sigma.T) / 2.0
    root, clipped = psd_sqrt(sigma)
    return CovarianceEstimate(sigma, root, clipped)
