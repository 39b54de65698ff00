"""Gaussian machinery: PSD roots, Gaussian partial sums and Brownian-bridge Monte Carlo.

Random streams
--------------
Every draw comes from an :class:`RngSpec` ``(master_seed, stream_id)``.  The
bit generator is ``SFC64`` seeded through ``numpy.random.SeedSequence`` with
``spawn_key = (stream_id, block)``.  Monte Carlo paths are simulated in fixed
blocks of :data:`BLOCK_PATHS` paths, block ``b`` drawing from its own derived
stream, so results depend only on the RngSpec and never on how blocks are
scheduled across worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .sample import SeqPath

#: paths per independently seeded simulation block
BLOCK_PATHS = 512

#: default bridge grid never coarser than this
MIN_BRIDGE_GRID = 512


@dataclass(frozen=True)
class RngSpec:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise InputError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if int(self.stream_id) < 0:
            raise InputError(f"stream_id must be non-negative, got {self.stream_id}")

    def generator(self, *sub: int) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.stream_id), *sub))
        return np.random.Generator(np.random.SFC64(seq))

    def offset(self, by: int) -> "RngSpec":
        return RngSpec(self.master_seed, self.stream_id + by)


def psd_sqrt(sigma, sym_tol: float = 1e-8) -> tuple[np.ndarray, float]:
    """Symmetric square root of the PSD projection of ``sigma``.

    Negative eigenvalues are clipped to zero; the second return value is the
    total clipped mass (sum of their magnitudes).
    """
    a = np.asarray(sigma, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise InputError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > sym_tol * scale:
        raise InputError("matrix is not symmetric")
    a = (a + a.T) / 2.0
    lam, vec = np.linalg.eigh(a)
    clipped = float(-lam[lam < 0].sum())
    root = (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.T
    return (root + root.T) / 2.0, clipped


def _check_root(root) -> np.ndarray:
    root = np.atleast_2d(np.asarray(root, dtype=float))
    if root.ndim != 2 or root.shape[0] != root.shape[1]:
        raise InputError(f"root must be a square matrix, got shape {root.shape}")
    if not np.isfinite(root).all():
        raise InputError("root has non-finite entries")
    return root


def gaussian_partial_sums(root, n: int, rng: RngSpec) -> SeqPath:
    """W_k = n^{-1/2} sum_{i<=k} root @ xi_i for k = 1..n with xi_i standard normal."""
    root = _check_root(root)
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    xi = rng.generator().standard_normal((n, root.shape[0]))
    w = np.cumsum(xi @ root.T, axis=0) / math.sqrt(n)
    return SeqPath(w, 1, n, n)


def _blocks(n_paths):
    return [(b, min(BLOCK_PATHS, n_paths - start)) for b, start in enumerate(range(0, n_paths, BLOCK_PATHS))]


def _run_blocks(fn, n_paths, threads):
    blocks = _blocks(n_paths)
    if threads and threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda bc: fn(*bc), blocks))
    else:
        parts = [fn(b, c) for b, c in blocks]
    return np.concatenate(parts) if parts else np.empty(0)


def _standard_bridge_block(gen, count, m, d):
    """Standard d-dim Brownian bridges on t_j = j/m, j = 0..m; shape (count, m+1, d)."""
    steps = gen.standard_normal((count, m, d))
    steps /= math.sqrt(m)
    out = np.zeros((count, m + 1, d))
    np.cumsum(steps, axis=1, out=out[:, 1:])
    t = np.arange(m + 1) / m
    out -= t[None, :, None] * out[:, -1:, :]
    out[:, -1, :] = 0.0
    return out


def bridge_paths(root, grid_size: int, n_paths: int, rng: RngSpec) -> np.ndarray:
    """Scaled bridges 2 @ root @ B(t_j), t_j = j/m for j = 0..m; shape (n_paths, m+1, d).

    Meant for inspection at modest sizes; :func:`brownian_bridge_sups` uses the
    same streams without materialising every path at once.
    """
    root = _check_root(root)
    if grid_size < 2 or n_paths < 1:
        raise InputError("need grid_size >= 2 and n_paths >= 1")
    d = root.shape[0]
    parts = [
        _standard_bridge_block(rng.generator(b), c, grid_size, d) @ (2.0 * root).T for b, c in _blocks(n_paths)
    ]
    return np.concatenate(parts)


@dataclass(frozen=True)
class BridgePathSet:
    sup_norms: np.ndarray
    n_paths: int
    grid_size: int

    def __post_init__(self):
        if len(self.sup_norms) != self.n_paths:
            raise InputError("sup_norms length does not match n_paths")


def brownian_bridge_sups(root, grid_size: int, n_paths: int, rng: RngSpec, threads: int = 1) -> BridgePathSet:
    """Simulate sup_j ||2 root B(j/m)||_2 over interior grid points for ``n_paths`` bridges.

    The simulated process has covariance 4 (min(s, t) - s t) root root^T.
    """
    root = _check_root(root)
    if grid_size < 2:
        raise InputError(f"grid_size must be at least 2, got {grid_size}")
    if n_paths < 1:
        raise InputError(f"n_paths must be at least 1, got {n_paths}")
    d = root.shape[0]
    m = grid_size
    # same draws as _standard_bridge_block, with the 1/sqrt(m) step size folded into the scale
    scale = (2.0 * root).T / math.sqrt(m)
    t_inner = (np.arange(1, m) / m)[None, :, None]

    def block(b, count):
        walk = rng.generator(b).standard_normal((count, m, d))
        np.cumsum(walk, axis=1, out=walk)
        bridge = walk[:, :-1]
        bridge -= t_inner * walk[:, -1:]
        y = bridge @ scale
        return np.sqrt(np.einsum("ijk,ijk->ij", y, y).max(axis=1))

    sups = _run_blocks(block, n_paths, threads)
    return BridgePathSet(sups, n_paths, grid_size)


def bridge_grid_size(n: int) -> int:
    """Bridge grid for comparison against a statistic computed from n observations."""
    return max(int(n), MIN_BRIDGE_GRID)


def upper_quantile(values, alpha: float) -> float:
    """Empirical (1 - alpha)-quantile: the ceil((1 - alpha) N)-th smallest value (1-based)."""
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InputError("cannot take a quantile of an empty sample")
    # the guard keeps (1 - 0.05) * 20000 from rounding up past 19000
    rank = max(1, math.ceil((1.0 - alpha) * values.size - 1e-9))
    return float(np.partition(values, rank - 1)[rank - 1])


def sup_quantile(paths: BridgePathSet, alpha: float) -> float:
    if paths.n_paths < 100:
        raise InputError(f"need at least 100 simulated paths for a quantile, got {paths.n_paths}")
    return upper_quantile(paths.sup_norms, alpha)


def sn_limit_sample(n_paths: int, grid_size: int, rng: RngSpec, threads: int = 1) -> np.ndarray:
    """Draws of B(1) / sqrt(int_0^1 (B(s) - s B(1))^2 ds) for standard Brownian motion B.

    The integral is a midpoint rule over ``grid_size`` cells; the motion is
    simulated on the half-cell grid so the midpoints are exact draws.
    """
    if grid_size < 16:
        raise InputError(f"grid_size must be at least 16, got {grid_size}")
    if n_paths < 100:
        raise InputError(f"need at least 100 paths, got {n_paths}")
    m = grid_size
    mid_t = (np.arange(m) + 0.5) / m

    def block(b, count):
        steps = rng.generator(b).standard_normal((count, 2 * m))
        steps /= math.sqrt(2 * m)
        walk = np.cumsum(steps, axis=1)
        end = walk[:, -1]
        centred = walk[:, 0::2] - mid_t[None, :] * end[:, None]
        return end / np.sqrt(np.mean(centred * centred, axis=1))

    return _run_blocks(block, n_paths, threads)
