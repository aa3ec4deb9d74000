"""Smoothed point sources.

A Dirac delta is replaced by a normalized kernel of width alpha; in d
dimensions the kernel is the coordinate-wise product of 1-D densities.
The near-source region used for concentrated sampling is the ball of
radius 3*alpha around the source location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["KERNELS", "kernel_1d", "PointSource", "WidthSchedule", "SUPPORT_RADII"]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Near-source ball radius, in units of alpha.
SUPPORT_RADII = 3.0


def _gaussian_1d(z: np.ndarray, alpha: float) -> np.ndarray:
    return np.exp(-(z * z) / (2.0 * alpha * alpha)) / (alpha * _SQRT_2PI)


def _cauchy_1d(z: np.ndarray, alpha: float) -> np.ndarray:
    return 1.0 / (math.pi * alpha * (1.0 + (z / alpha) ** 2))


def _laplace_1d(z: np.ndarray, alpha: float) -> np.ndarray:
    return np.exp(-np.abs(z) / alpha) / (2.0 * alpha)


KERNELS = {
    "gaussian": _gaussian_1d,
    "cauchy": _cauchy_1d,
    "laplace": _laplace_1d,
}


def kernel_1d(name: str, z: np.ndarray, alpha: float) -> np.ndarray:
    """Normalized 1-D kernel density at offsets z."""
    if alpha <= 0.0:
        raise ValueError(f"kernel width must be positive, got {alpha}")
    try:
        fn = KERNELS[name]
    except KeyError:
        raise ConfigError(
            f"unknown kernel {name!r}; expected one of {sorted(KERNELS)}"
        ) from None
    return fn(np.asarray(z, dtype=np.float64), alpha)


@dataclass(frozen=True)
class PointSource:
    """A point source at a fixed spatial location, smoothed by a kernel."""

    location: tuple[float, ...]
    kernel: str = "gaussian"

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ConfigError(
                f"unknown kernel {self.kernel!r}; expected one of {sorted(KERNELS)}"
            )

    @property
    def dim(self) -> int:
        return len(self.location)

    def density(self, points: np.ndarray, alpha: float) -> np.ndarray:
        """Product-kernel density at spatial points of shape (batch, dim)."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise ValueError(f"points must be (batch, {self.dim}), got {pts.shape}")
        out = np.ones(pts.shape[0])
        for axis, center in enumerate(self.location):
            out *= kernel_1d(self.kernel, pts[:, axis] - center, alpha)
        return out

    def ball_radius(self, alpha: float) -> float:
        """Radius of the concentrated-sampling ball around the source."""
        if alpha <= 0.0:
            raise ValueError(f"kernel width must be positive, got {alpha}")
        return SUPPORT_RADII * alpha


@dataclass(frozen=True)
class WidthSchedule:
    """Piecewise-constant kernel width over training iterations.

    In "halving" mode the width stays at alpha0 for `first_segment`
    iterations and halves every `halve_every` iterations after that.
    """

    alpha0: float = 0.01
    mode: str = "fixed"
    first_segment: int = 140_000
    halve_every: int = 70_000

    def __post_init__(self):
        if self.alpha0 <= 0.0:
            raise ValueError("alpha0 must be positive")
        if self.mode not in ("fixed", "halving"):
            raise ConfigError(f"schedule mode must be fixed or halving, got {self.mode!r}")
        if self.mode == "halving" and (self.first_segment <= 0 or self.halve_every <= 0):
            raise ValueError("schedule segments must be positive")

    def alpha_at(self, iteration: int) -> float:
        if iteration < 0:
            raise ValueError("iteration must be non-negative")
        if self.mode == "fixed" or iteration < self.first_segment:
            return self.alpha0
        halvings = 1 + (iteration - self.first_segment) // self.halve_every
        return self.alpha0 * 0.5**halvings
