"""Symmetric vector-valued kernels h(x, y) for order-two U-statistics.

Every family maps a pair of p-vectors to a d-vector.  Families that act
coordinatewise (Gini mean difference, characteristic dispersion, coordinate
product) have d = p; the rank-one direction families (spatial Kendall's tau
and its Huber-scored generalisation) have d = p**2 with row-major
vectorisation.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegeneratePairError, InputError, UnsupportedPairError

#: relative threshold below which a pair difference is treated as a tie
DEGENERACY_RTOL = 1e-12


class KernelFamily(str, enum.Enum):
    GINI_MEAN_DIFFERENCE = "gmd"
    CHARACTERISTIC_DISPERSION = "cdp"
    SPATIAL_KENDALL_TAU = "skt"
    HUBER_SCORED_COVARIANCE = "huber"
    COORDINATE_PRODUCT = "product"


_MATRIX_FAMILIES = (KernelFamily.SPATIAL_KENDALL_TAU, KernelFamily.HUBER_SCORED_COVARIANCE)


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family together with its parameters.

    ``xi`` is the Huber threshold and is only meaningful for
    :attr:`KernelFamily.HUBER_SCORED_COVARIANCE`.
    """

    family: KernelFamily
    xi: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if self.family is KernelFamily.HUBER_SCORED_COVARIANCE:
            if self.xi is None or not (self.xi > 0 and math.isfinite(self.xi)):
                raise InputError("Huber-scored kernel needs a finite threshold xi > 0")
        elif self.xi is not None:
            raise InputError(f"kernel family {self.family.value!r} takes no parameters")

    @classmethod
    def parse(cls, name: str, xi: float | None = None) -> "KernelSpec":
        try:
            family = KernelFamily(name.strip().lower())
        except ValueError:
            names = ", ".join(f.value for f in KernelFamily)
            raise InputError(f"unknown kernel {name!r}; expected one of {names}") from None
        return cls(family, xi if family is KernelFamily.HUBER_SCORED_COVARIANCE else None)

    def dimension(self, p: int) -> int:
        return kernel_dimension(self, p)


def kernel_dimension(spec: KernelSpec, p: int) -> int:
    """Output dimension d of ``spec`` on p-dimensional observations."""
    if int(p) != p or p < 1:
        raise InputError(f"observation dimension must be a positive integer, got {p!r}")
    p = int(p)
    return p * p if spec.family in _MATRIX_FAMILIES else p


def _huber_score(t: np.ndarray, xi: float) -> np.ndarray:
    # psi_xi(t) = xi * psi(t / xi) with psi(t) = min(t, 1)
    return np.minimum(t, xi)


def kernel_rows(spec: KernelSpec, x: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Evaluate h(x, y) for every row y of ``others``.

    Returns an ``(m, d)`` array.  Raises :class:`DegeneratePairError` for a
    spatial Kendall's tau tie; ``err.index`` is the offending row of
    ``others``.
    """
    diff = others - x
    fam = spec.family
    if fam is KernelFamily.GINI_MEAN_DIFFERENCE:
        return np.abs(diff)
    if fam is KernelFamily.CHARACTERISTIC_DISPERSION:
        return np.cos(diff)
    if fam is KernelFamily.COORDINATE_PRODUCT:
        return others * x

    m, p = diff.shape
    sq = np.einsum("ij,ij->i", diff, diff)
    outer = (diff[:, :, None] * diff[:, None, :]).reshape(m, p * p)
    if fam is KernelFamily.SPATIAL_KENDALL_TAU:
        scale = np.maximum(1.0, np.maximum(np.sqrt(x @ x), np.sqrt(np.einsum("ij,ij->i", others, others))))
        tied = np.sqrt(sq) < DEGENERACY_RTOL * scale
        if tied.any():
            raise DegeneratePairError(
                "spatial Kendall's tau is undefined for tied observations", index=int(np.argmax(tied))
            )
        return outer / sq[:, None]

    # Huber-scored: psi(0) = 0 so ties contribute the zero matrix
    with np.errstate(invalid="ignore", divide="ignore"):
        weight = np.where(sq > 0, _huber_score(sq / 2.0, spec.xi) / sq, 0.0)
    return outer * weight[:, None]


def eval_kernel(spec: KernelSpec, x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """h(x, y) for a single pair of observations."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size == 0:
        raise InputError(f"kernel arguments must be equal-length vectors, got {x.shape} and {y.shape}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise InputError("kernel arguments must be finite")
    try:
        return kernel_rows(spec, x, y[None, :])[0]
    except DegeneratePairError as err:
        raise DegeneratePairError(str(err)) from None


# -- closed forms -------------------------------------------------------------


class MarginalFamily(str, enum.Enum):
    NORMAL = "normal"
    CAUCHY = "cauchy"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class Marginal:
    """A univariate location-scale law: Normal(loc, sigma), Cauchy(loc, gamma), Laplace(loc, b)."""

    family: MarginalFamily
    scale: float
    loc: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", MarginalFamily(self.family))
        if not self.scale >= 0:
            raise InputError(f"scale must be non-negative, got {self.scale}")


def _theta_one(spec: KernelSpec, m: Marginal) -> float:
    fam = spec.family
    if fam is KernelFamily.GINI_MEAN_DIFFERENCE and m.family is MarginalFamily.NORMAL:
        return 2.0 * m.scale / math.sqrt(math.pi)
    if fam is KernelFamily.CHARACTERISTIC_DISPERSION:
        if m.family is MarginalFamily.NORMAL:
            return math.exp(-m.scale**2)
        if m.family is MarginalFamily.CAUCHY:
            return math.exp(-2.0 * m.scale)
        if m.family is MarginalFamily.LAPLACE:
            return (1.0 + m.scale**2) ** -2
    raise UnsupportedPairError(f"no closed form for kernel {fam.value!r} under {m.family.value} marginals")


def closed_form_theta(spec: KernelSpec, marginals: Marginal | Sequence[Marginal]) -> np.ndarray:
    """Analytic theta = E h(X, X') for independent coordinates.

    >>> closed_form_theta(KernelSpec("cdp"), Marginal("laplace", 1.0))
    array([0.25])
    """
    if isinstance(marginals, Marginal):
        marginals = [marginals]
    return np.array([_theta_one(spec, m) for m in marginals])


#: Var of the GMD projection for a standard normal coordinate
GMD_GAUSSIAN_PROJECTION_VARIANCE = 1.0 / 3.0 + (2.0 * math.sqrt(3.0) - 4.0) / math.pi


def gmd_gaussian_sigma(sigmas: Sequence[float]) -> np.ndarray:
    """Projection covariance of the GMD kernel under independent N(mu, sigma^2) coordinates."""
    sigmas = np.asarray(sigmas, dtype=float)
    return GMD_GAUSSIAN_PROJECTION_VARIANCE * np.diag(sigmas**2)
