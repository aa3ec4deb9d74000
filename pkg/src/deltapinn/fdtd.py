"""Staggered-grid leapfrog reference solver for the 2-D TE pulse problem.

Field layout on an N x N cell grid over [lo, hi]^2 with spacing delta:
Ex (N, N+1) on horizontal edge midpoints, Ey (N+1, N) on vertical edge
midpoints, Hz (N, N) on cell centers at half-integer time steps. The
absorbing boundary advances the tangential E lines with the second-order
one-way wave operator; the outermost node of each boundary line, which has
no tangential neighbors, uses the first-order operator.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import ConfigError, GeometryError
from .series import ReferenceField

__all__ = ["FdtdGrid", "FdtdResult", "fdtd_run", "collocated_points"]

BOUNDARIES = ("mur", "pec")


@dataclass
class FdtdGrid:
    resolution: float = 0.005
    courant: float = 0.5
    lo: tuple[float, float] = (-1.0, -1.0)
    hi: tuple[float, float] = (1.0, 1.0)
    boundary: str = "mur"
    nx: int = dataclass_field(init=False)
    ny: int = dataclass_field(init=False)

    def __post_init__(self):
        if not 0.0 < self.courant <= 1.0:
            raise ConfigError(
                f"courant factor {self.courant} violates the stability bound (0, 1]"
            )
        if self.boundary not in BOUNDARIES:
            raise ConfigError(f"boundary must be one of {BOUNDARIES}")
        sizes = []
        for axis in range(2):
            extent = self.hi[axis] - self.lo[axis]
            n = extent / self.resolution
            if abs(n - round(n)) > 1e-9 or round(n) < 4:
                raise GeometryError(
                    f"extent {extent} is not a multiple (>= 4) of resolution "
                    f"{self.resolution}"
                )
            sizes.append(int(round(n)))
        self.nx, self.ny = sizes

    @property
    def dt(self) -> float:
        # 2-D stability bound dt <= delta / sqrt(2); courant scales within it
        return self.courant * self.resolution / np.sqrt(2.0)

    def cell_centers(self) -> np.ndarray:
        x = self.lo[0] + self.resolution * (np.arange(self.nx) + 0.5)
        y = self.lo[1] + self.resolution * (np.arange(self.ny) + 0.5)
        xx, yy = np.meshgrid(x, y, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])


def collocated_points(grid: FdtdGrid) -> np.ndarray:
    return grid.cell_centers()


@dataclass
class FdtdResult:
    snapshots: list[ReferenceField]
    energy_times: np.ndarray
    energies: np.ndarray


def _mur_advance(b_new, b_cur, b_old, i_new, i_cur, i_old, dt, d):
    """Second-order absorbing update for one tangential boundary line.

    b_*: boundary line at t+dt (output), t, t-dt; i_*: adjacent interior line.
    """
    k1 = (dt - d) / (dt + d)
    k2 = 2.0 * d / (dt + d)
    k3 = dt * dt / (2.0 * d * (dt + d))
    lap = lambda a: a[2:] - 2.0 * a[1:-1] + a[:-2]
    b_new[1:-1] = (
        -i_old[1:-1]
        + k1 * (i_new[1:-1] + b_old[1:-1])
        + k2 * (b_cur[1:-1] + i_cur[1:-1])
        + k3 * (lap(b_cur) + lap(i_cur))
    )
    for j in (0, -1):  # line ends: no tangential neighbors, first-order update
        b_new[j] = i_cur[j] + k1 * (i_new[j] - b_cur[j])


def fdtd_run(
    grid: FdtdGrid,
    problem=None,
    alpha: float = 0.01,
    t_end: float = 0.0,
    snapshot_times=(),
    initial_hz=None,
    collect_energy: bool = False,
) -> FdtdResult:
    """Leapfrog run collecting center-collocated snapshots and field energy.

    `problem` supplies the current source (its kernel profile sampled on cell
    centers and Gaussian time envelope); None runs source-free. `initial_hz`
    seeds Hz from a callable on cell centers. Snapshot times snap to the
    nearest integer step; Hz is averaged across its two half steps there.
    """
    d = grid.resolution
    dt = grid.dt
    nx, ny = grid.nx, grid.ny
    ex = np.zeros((nx, ny + 1))
    ey = np.zeros((nx + 1, ny))
    centers = grid.cell_centers()
    hz = (
        np.asarray(initial_hz(centers), dtype=float).reshape(nx, ny)
        if initial_hz is not None
        else np.zeros((nx, ny))
    )

    if problem is not None:
        profile = problem.source.density(centers, alpha).reshape(nx, ny)
        envelope = lambda t: np.exp(-(((t - problem.delay) / problem.tau) ** 2))
    else:
        profile, envelope = None, None

    snap_steps = {}
    for t_req in snapshot_times:
        snap_steps.setdefault(int(round(t_req / dt)), []).append(t_req)
    n_steps = max([int(round(t_end / dt))] + list(snap_steps))

    mur = grid.boundary == "mur"
    ex_old = ex.copy()
    ey_old = ey.copy()
    snapshots = []
    energy_times, energies = [], []

    def make_snapshot(step, hz_avg, t_req):
        values = np.column_stack(
            [
                0.5 * (ex[:, :-1] + ex[:, 1:]).ravel(),
                0.5 * (ey[:-1, :] + ey[1:, :]).ravel(),
                hz_avg.ravel(),
            ]
        )
        return ReferenceField(
            points=centers,
            values=values,
            meta={
                "generator": "fdtd",
                "resolution": d,
                "courant": grid.courant,
                "boundary": grid.boundary,
                "time": step * dt,
                "requested_time": t_req,
            },
        )

    # each iteration advances Hz half a step past E^step, so the snapshot at
    # integer step (E^step with Hz averaged over its two half steps) and the
    # conserved-energy sample both happen mid-iteration, before E moves on
    for step in range(n_steps + 1):
        t_now = step * dt
        hz_prev = hz
        curl = (ex[:, 1:] - ex[:, :-1]) - (ey[1:, :] - ey[:-1, :])
        hz = hz + (dt / d) * curl
        if profile is not None:
            hz = hz - dt * envelope(t_now) * profile

        if step in snap_steps:
            hz_avg = 0.5 * (hz_prev + hz)
            for t_req in snap_steps[step]:
                snapshots.append(make_snapshot(step, hz_avg, t_req))
        if collect_energy:
            energies.append(
                d * d * ((ex**2).sum() + (ey**2).sum() + (hz_prev * hz).sum())
            )
            energy_times.append(t_now)
        if step == n_steps:
            break

        ex_new = ex.copy()
        ey_new = ey.copy()
        ex_new[:, 1:-1] = ex[:, 1:-1] + (dt / d) * (hz[:, 1:] - hz[:, :-1])
        ey_new[1:-1, :] = ey[1:-1, :] - (dt / d) * (hz[1:, :] - hz[:-1, :])
        if mur:
            _mur_advance(
                ey_new[0], ey[0], ey_old[0], ey_new[1], ey[1], ey_old[1], dt, d
            )
            _mur_advance(
                ey_new[-1], ey[-1], ey_old[-1], ey_new[-2], ey[-2], ey_old[-2], dt, d
            )
            _mur_advance(
                ex_new[:, 0], ex[:, 0], ex_old[:, 0], ex_new[:, 1], ex[:, 1],
                ex_old[:, 1], dt, d,
            )
            _mur_advance(
                ex_new[:, -1], ex[:, -1], ex_old[:, -1], ex_new[:, -2], ex[:, -2],
                ex_old[:, -2], dt, d,
            )
        # pec: tangential boundary lines stay at zero
        ex_old, ey_old = ex, ey
        ex, ey = ex_new, ey_new

    return FdtdResult(
        snapshots=snapshots,
        energy_times=np.asarray(energy_times),
        energies=np.asarray(energies),
    )
