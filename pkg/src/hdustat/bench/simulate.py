"""Synthetic designs with independent location-scale coordinates and an optional single break."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..gaussmc import RngSpec
from ..kernels import Marginal, MarginalFamily
from ..sample import Sample


def _broadcast(name, values, p):
    v = np.asarray(values, dtype=float).reshape(-1)
    if v.size == 1:
        return np.full(p, v[0])
    if v.size != p:
        raise ConfigError(f"{name} has {v.size} entries, expected 1 or p={p}")
    return v


@dataclass(frozen=True)
class Design:
    dist: str
    n: int
    p: int
    loc: tuple = (0.0,)
    scale: tuple = (1.0,)
    tau_star: float | None = None
    shift: tuple = (0.0,)
    scale_shift: tuple = (0.0,)

    def __post_init__(self):
        try:
            MarginalFamily(self.dist)
        except ValueError:
            raise ConfigError(f"unknown distribution {self.dist!r}") from None
        if self.n < 2 or self.p < 1:
            raise ConfigError(f"design needs n >= 2 and p >= 1, got n={self.n}, p={self.p}")
        if self.tau_star is not None and not 0 < self.tau_star < 1:
            raise ConfigError(f"tau_star must lie in (0, 1), got {self.tau_star}")
        for name in ("loc", "scale", "shift", "scale_shift"):
            object.__setattr__(self, name, tuple(_broadcast(name, getattr(self, name), self.p)))
        if min(self.scale) < 0 or (self.has_break and min(self.post_scale) < 0):
            raise ConfigError("scales must be non-negative before and after the break")

    @property
    def has_break(self) -> bool:
        return self.tau_star is not None and (any(self.shift) or any(self.scale_shift))

    @property
    def post_loc(self) -> np.ndarray:
        return np.add(self.loc, self.shift)

    @property
    def post_scale(self) -> np.ndarray:
        return np.add(self.scale, self.scale_shift)

    @property
    def break_index(self) -> int:
        """Number of pre-break rows, floor(n tau*)."""
        return int(np.floor(self.n * self.tau_star)) if self.has_break else self.n

    def null(self) -> "Design":
        return Design(self.dist, self.n, self.p, self.loc, self.scale)

    def marginals(self, post: bool = False) -> list[Marginal]:
        loc, scale = (self.post_loc, self.post_scale) if post else (self.loc, self.scale)
        return [Marginal(self.dist, s, m) for m, s in zip(loc, scale)]


def _standard(gen, dist, shape):
    if dist == "normal":
        return gen.standard_normal(shape)
    if dist == "cauchy":
        return gen.standard_cauchy(shape)
    return gen.laplace(0.0, 1.0, shape)


def simulate_dataset(design: Design, rng: RngSpec | np.random.Generator) -> Sample:
    """Draw an n x p sample; rows after floor(n tau*) use the post-break parameters."""
    gen = rng.generator() if isinstance(rng, RngSpec) else rng
    z = _standard(gen, design.dist, (design.n, design.p))
    loc = np.tile(np.asarray(design.loc), (design.n, 1))
    scale = np.tile(np.asarray(design.scale), (design.n, 1))
    k = design.break_index
    loc[k:] = design.post_loc
    scale[k:] = design.post_scale
    return Sample(loc + scale * z)
