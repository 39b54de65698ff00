"""Containers shared by the statistical modules."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Sample:
    """An n x p matrix of finite observations, one row per observation."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float, copy=True)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise InputError(f"sample must be a 2-d array, got shape {data.shape}")
        if data.shape[0] < 2:
            raise InputError(f"sample needs at least 2 observations, got {data.shape[0]}")
        if data.shape[1] < 1:
            raise InputError("sample needs at least one coordinate")
        bad = ~np.isfinite(data)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise InputError(f"non-finite value at row {row + 1}, column {col + 1}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


def as_sample(obj) -> Sample:
    return obj if isinstance(obj, Sample) else Sample(obj)


@dataclass(frozen=True)
class SeqPath:
    """Vectors indexed by k = k_start..k_end, stored as rows of ``values``."""

    values: np.ndarray
    k_start: int
    k_end: int
    n: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InputError(f"path values must be 2-d, got shape {values.shape}")
        if len(values) != self.k_end - self.k_start + 1:
            raise InputError(
                f"path holds {len(values)} vectors but index range is {self.k_start}..{self.k_end}"
            )
        object.__setattr__(self, "values", values)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_start, self.k_end + 1)

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k: int) -> np.ndarray:
        """Vector at time index ``k`` (not the storage position)."""
        if not self.k_start <= k <= self.k_end:
            raise IndexError(f"k={k} outside {self.k_start}..{self.k_end}")
        return self.values[k - self.k_start]

    def norms(self) -> np.ndarray:
        return np.sqrt(np.einsum("ij,ij->i", self.values, self.values))
