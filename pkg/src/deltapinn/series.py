"""Closed-form reference fields for the steady and poroelastic benchmarks.

Both references are separable sine-series solutions of their PDEs with the
point source expanded in the same basis, truncated at a finite mode count.
Series values are singular (log-divergent) exactly at the source location;
those points are flagged out of metric evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError

__all__ = [
    "ReferenceField",
    "poisson_series",
    "poisson_eval_mesh",
    "barry_mercer_mode_amplitudes",
    "barry_mercer_series",
    "barry_mercer_eval_mesh",
    "PRESSURE_DENOMINATORS",
]

# The closed-form pressure amplitude divides by lam^2 + omega^2 ("resolvent"):
# solving the per-mode ODE p' + lam p = -beta F sin(omega t) with p(0) = 0
# forces that factor. "plain" divides by lam^2 only and is kept so tests can
# demonstrate that its series does not satisfy the flow-balance equation.
PRESSURE_DENOMINATORS = ("resolvent", "plain")


@dataclass
class ReferenceField:
    """Point set with reference values; mask rows excluded from metrics."""

    points: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)
    mask: np.ndarray | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.points.shape[0] != self.values.shape[0]:
            raise ValueError("points and values disagree on N")
        if not np.all(np.isfinite(self.values)):
            raise NumericError("reference field contains non-finite values")


def _source_rows(points: np.ndarray, center, tol: float = 1e-9) -> np.ndarray:
    d = np.abs(points[:, :2] - np.asarray(center))
    return np.all(d < tol, axis=1)


# ---------------------------------------------------------------------------
# Poisson on (0, pi)^2


def poisson_series(
    points: np.ndarray,
    center: tuple[float, float] = (math.pi / 2, math.pi / 2),
    terms: int = 400,
) -> ReferenceField:
    """u(x, y) = (4/pi^2) sum_{m,n} sin(mx)sin(mx0)sin(ny)sin(ny0)/(m^2+n^2)."""
    if terms < 1:
        raise ValueError("terms must be >= 1")
    points = np.asarray(points, dtype=float)
    m = np.arange(1, terms + 1)
    inv = 1.0 / (m[:, None] ** 2 + m[None, :] ** 2)
    sx = np.sin(points[:, 0:1] * m) * np.sin(m * center[0])
    sy = np.sin(points[:, 1:2] * m) * np.sin(m * center[1])
    values = (4.0 / math.pi**2) * np.sum((sx @ inv) * sy, axis=1)
    singular = _source_rows(points, center)
    return ReferenceField(
        points=points,
        values=values,
        meta={"generator": "poisson-series", "terms": terms},
        mask=~singular,
    )


def poisson_eval_mesh(
    n: int = 101, center: tuple[float, float] = (math.pi / 2, math.pi / 2)
) -> np.ndarray:
    """Uniform n x n grid on [0, pi]^2, boundary and source node removed."""
    axis = np.linspace(0.0, math.pi, n)[1:-1]
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return pts[~_source_rows(pts, center)]


# ---------------------------------------------------------------------------
# Barry-Mercer on (0, 1)^2 x [0, 2 pi]


def _mode_tables(modes: int, center, beta: float, omega: float, denominator: str):
    if denominator not in PRESSURE_DENOMINATORS:
        raise ValueError(
            f"unknown denominator {denominator!r}; expected one of {PRESSURE_DENOMINATORS}"
        )
    k = np.arange(1, modes + 1)
    ln = k * math.pi  # a = b = 1
    lam = ln[:, None] ** 2 + ln[None, :] ** 2
    f = np.sin(ln * center[0])[:, None] * np.sin(ln * center[1])[None, :]
    den = lam**2 + omega**2 if denominator == "resolvent" else lam**2
    coef = -beta * f / den
    return ln, lam, coef


def barry_mercer_mode_amplitudes(
    t: float,
    modes: int = 64,
    center: tuple[float, float] = (0.25, 0.25),
    beta: float = 2.0,
    omega: float = 1.0,
    denominator: str = "resolvent",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(uhat, vhat, phat) tables over mode indices n, q = 1..modes at time t."""
    ln, lam, coef = _mode_tables(modes, center, beta, omega, denominator)
    phat = coef * (
        lam * math.sin(omega * t)
        - omega * math.cos(omega * t)
        + omega * np.exp(-lam * t)
    )
    uhat = phat * (ln[:, None] / lam)
    vhat = phat * (ln[None, :] / lam)
    return uhat, vhat, phat


def barry_mercer_series(
    points: np.ndarray,
    modes: int = 64,
    center: tuple[float, float] = (0.25, 0.25),
    beta: float = 2.0,
    omega: float = 1.0,
    denominator: str = "resolvent",
) -> ReferenceField:
    """(u, v, p) at spacetime points (x, z, t).

    u = 4 sum uhat cos(ln x) sin(lq z), v = 4 sum vhat sin(ln x) cos(lq z),
    p = -4 sum phat sin(ln x) sin(lq z).
    """
    if modes < 1:
        raise ValueError("modes must be >= 1")
    points = np.asarray(points, dtype=float)
    ln, lam, coef = _mode_tables(modes, center, beta, omega, denominator)
    out = np.empty((points.shape[0], 3))
    # time-dependent mode tables are (chunk, modes, modes); bound the temporary
    chunk = max(1, 4_000_000 // (modes * modes))
    for start in range(0, points.shape[0], chunk):
        x = points[start : start + chunk, 0]
        z = points[start : start + chunk, 1]
        t = points[start : start + chunk, 2]
        osc = lam[None, :, :] * np.sin(omega * t)[:, None, None]
        osc -= omega * np.cos(omega * t)[:, None, None]
        osc += omega * np.exp(-lam[None, :, :] * t[:, None, None])
        phat = coef[None, :, :] * osc
        del osc
        sin_x = np.sin(x[:, None] * ln)
        cos_x = np.cos(x[:, None] * ln)
        sin_z = np.sin(z[:, None] * ln)
        cos_z = np.cos(z[:, None] * ln)

        uhat = phat * (ln[:, None] / lam)[None, :, :]
        out[start : start + chunk, 0] = 4.0 * np.sum(
            (uhat @ sin_z[:, :, None])[:, :, 0] * cos_x, axis=1
        )
        del uhat
        vhat = phat * (ln[None, :] / lam)[None, :, :]
        out[start : start + chunk, 1] = 4.0 * np.sum(
            (vhat @ cos_z[:, :, None])[:, :, 0] * sin_x, axis=1
        )
        del vhat
        out[start : start + chunk, 2] = -4.0 * np.sum(
            (phat @ sin_z[:, :, None])[:, :, 0] * sin_x, axis=1
        )
    singular = _source_rows(points, center)
    return ReferenceField(
        points=points,
        values=out,
        meta={
            "generator": "barry-mercer-series",
            "modes": modes,
            "denominator": denominator,
        },
        mask=~singular,
    )


def barry_mercer_eval_mesh(
    n: int = 51,
    num_times: int = 8,
    t_end: float = 2 * math.pi,
    center: tuple[float, float] = (0.25, 0.25),
) -> np.ndarray:
    """Interior spatial grid crossed with uniform times (0, t_end]."""
    axis = np.linspace(0.0, 1.0, n)[1:-1]
    xx, zz = np.meshgrid(axis, axis, indexing="ij")
    spatial = np.column_stack([xx.ravel(), zz.ravel()])
    spatial = spatial[~_source_rows(spatial, center)]
    times = t_end * np.arange(1, num_times + 1) / num_times
    pts = np.concatenate(
        [np.column_stack([spatial, np.full(spatial.shape[0], t)]) for t in times]
    )
    return pts
