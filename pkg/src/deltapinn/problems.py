"""Benchmark problems driven by point sources.

Each problem bundles its geometry, smoothed source, PDE residuals, boundary
residuals per face, and initial-condition residuals. Residual code uses only
bundle accessors and arithmetic, so it runs identically on live graph nodes
and on plain arrays (handy for checking against manufactured solutions).

Coordinate convention: spatial axes first, time last. Face keys are
(axis, 0) for the low side and (axis, 1) for the high side of that axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sampling import Domain
from .source import PointSource

__all__ = [
    "SPEED_OF_LIGHT",
    "si_pulse_width",
    "seconds_to_nondim",
    "PoissonPointSource",
    "MaxwellPulse2D",
    "BarryMercerInjection",
    "make_problem",
    "PROBLEM_NAMES",
]

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Electromagnetic quantities are nondimensionalized against a 1 m length
# scale: t_tilde = c t / L, fields rescaled so all equations carry unit
# coefficients and unit wave speed.
LENGTH_SCALE = 1.0


def si_pulse_width(frequency_hz: float) -> float:
    """Characteristic pulse width in seconds for a given source frequency."""
    return 3.65 * math.sqrt(2.3) / (math.pi * frequency_hz)


def seconds_to_nondim(t_seconds: float) -> float:
    return SPEED_OF_LIGHT * t_seconds / LENGTH_SCALE


@dataclass(frozen=True)
class PoissonPointSource:
    """-lap(u) = delta at the square's center, u = 0 on the boundary."""

    kernel: str = "gaussian"
    center: tuple[float, float] = (math.pi / 2, math.pi / 2)

    name = "poisson"
    field_names = ("u",)
    in_dim = 2
    out_dim = 1
    residual_order = 2
    bc_order = 0
    domain: Domain = field(default=Domain(lo=(0.0, 0.0), hi=(math.pi, math.pi)))

    @property
    def source(self) -> PointSource:
        return PointSource(location=self.center, kernel=self.kernel)

    def residuals(self, bundle, points, alpha):
        density = self.source.density(points[:, :2], alpha)
        lap = bundle.d2(0, 0, 0) + bundle.d2(0, 1, 1)
        return [-lap - density]

    def bc_residuals(self, face, bundle, points):
        return [bundle.value(0)]

    def ic_residuals(self, bundle, points):
        raise ValueError("steady problem has no initial condition")


@dataclass(frozen=True)
class MaxwellPulse2D:
    """TE fields (Ex, Ey, Hz) radiated by a smoothed current pulse at the
    origin, with outgoing-wave (Mur) boundary residuals on all four sides.

    Unit-coefficient nondimensional form; the time axis is t_tilde = c t.
    The current's time envelope is exp(-((t - delay) / tau)^2).
    """

    kernel: str = "gaussian"
    center: tuple[float, float] = (0.0, 0.0)
    # Pulse width 0.05 keeps the max-|Hz| ring within 2 grid cells of the
    # light cone t - delay (the |Hz| maximum leads the cone by ~0.35*tau)
    # while staying wide enough for a small network to resolve.
    tau: float = 0.05
    delay: float = 0.1
    duration: float = seconds_to_nondim(4e-9)  # ~1.19917

    name = "maxwell"
    field_names = ("Ex", "Ey", "Hz")
    in_dim = 3
    out_dim = 3
    residual_order = 1
    bc_order = 1

    @property
    def domain(self) -> Domain:
        return Domain(lo=(-1.0, -1.0), hi=(1.0, 1.0), time=(0.0, self.duration))

    @property
    def source(self) -> PointSource:
        return PointSource(location=self.center, kernel=self.kernel)

    def current_density(self, points: np.ndarray, alpha: float) -> np.ndarray:
        """Source term of the Hz equation at (x, y, t) points."""
        envelope = np.exp(-(((points[:, 2] - self.delay) / self.tau) ** 2))
        return envelope * self.source.density(points[:, :2], alpha)

    def residuals(self, bundle, points, alpha):
        j = self.current_density(points, alpha)
        ex_t, ey_t, hz_t = bundle.d1(0, 2), bundle.d1(1, 2), bundle.d1(2, 2)
        return [
            ex_t - bundle.d1(2, 1),                                  # Ex_t = Hz_y
            ey_t + bundle.d1(2, 0),                                  # Ey_t = -Hz_x
            hz_t + bundle.d1(1, 0) - bundle.d1(0, 1) + j,            # Hz_t = -curl E - J
        ]

    def bc_residuals(self, face, bundle, points):
        hz_t = bundle.d1(2, 2)
        axis, side = face
        if axis == 0:
            hz_n = bundle.d1(2, 0)
            tangent = 0.5 * bundle.d1(0, 1)  # Ex_y
        else:
            hz_n = bundle.d1(2, 1)
            tangent = 0.5 * bundle.d1(1, 0)  # Ey_x
        if side == 0:
            return [hz_n - hz_t + tangent]
        return [hz_n + hz_t - tangent]

    def ic_residuals(self, bundle, points):
        return [bundle.value(0), bundle.value(1), bundle.value(2)]


@dataclass(frozen=True)
class BarryMercerInjection:
    """Incompressible poroelastic square with an oscillating point injection.

    Fields (u, v, p): displacements and pressure on (x, z) in the unit
    square, t in [0, 2 pi]. eta is the normalized Lame coefficient
    (lambda + mu) / mu, beta the injection strength, omega the pulsation.
    """

    kernel: str = "gaussian"
    center: tuple[float, float] = (0.25, 0.25)
    beta: float = 2.0
    eta: float = 1.5
    omega: float = 1.0

    name = "barry_mercer"
    field_names = ("u", "v", "p")
    in_dim = 3
    out_dim = 3
    residual_order = 2
    bc_order = 1
    domain: Domain = field(
        default=Domain(lo=(0.0, 0.0), hi=(1.0, 1.0), time=(0.0, 2 * math.pi))
    )

    @property
    def source(self) -> PointSource:
        return PointSource(location=self.center, kernel=self.kernel)

    def injection(self, points: np.ndarray, alpha: float) -> np.ndarray:
        return self.source.density(points[:, :2], alpha) * np.sin(
            self.omega * points[:, 2]
        )

    def residuals(self, bundle, points, alpha):
        q = self.injection(points, alpha)
        e = self.eta
        # volumetric flow balance
        ra = (
            bundle.d2(0, 0, 2)
            + bundle.d2(1, 1, 2)
            - bundle.d2(2, 0, 0)
            - bundle.d2(2, 1, 1)
            - self.beta * q
        )
        # x- and z-equilibrium
        rb = (
            (e + 1.0) * bundle.d2(0, 0, 0)
            + bundle.d2(0, 1, 1)
            + e * bundle.d2(1, 0, 1)
            - (e + 1.0) * bundle.d1(2, 0)
        )
        rc = (
            bundle.d2(1, 0, 0)
            + (e + 1.0) * bundle.d2(1, 1, 1)
            + e * bundle.d2(0, 0, 1)
            - (e + 1.0) * bundle.d1(2, 1)
        )
        return [ra, rb, rc]

    def bc_residuals(self, face, bundle, points):
        axis, _ = face
        p = bundle.value(2)
        if axis == 0:  # x faces: drained, vertically clamped, free horizontal strain
            return [p, bundle.value(1), bundle.d1(0, 0)]
        return [p, bundle.value(0), bundle.d1(1, 1)]

    def ic_residuals(self, bundle, points):
        return [bundle.value(0), bundle.value(1), bundle.value(2)]


PROBLEM_NAMES = ("poisson", "maxwell", "barry_mercer")


def make_problem(name: str, **kwargs):
    table = {
        "poisson": PoissonPointSource,
        "maxwell": MaxwellPulse2D,
        "barry_mercer": BarryMercerInjection,
    }
    try:
        cls = table[name]
    except KeyError:
        raise ValueError(
            f"unknown problem {name!r}; expected one of {PROBLEM_NAMES}"
        ) from None
    return cls(**kwargs)
