"""Domain geometry and per-iteration collocation sampling.

Each training iteration draws a fresh batch: near-source interior points
(uniform on the ball of radius 3*alpha around the source, intersected with
the domain), far interior points (uniform on the domain minus that ball),
boundary points split evenly across faces, and initial-time points for
time-dependent problems. Draws are deterministic in (seed, iteration).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

__all__ = ["Domain", "BatchSizes", "SampleBatch", "sample_batch", "face_list"]

_SAMPLE_STREAM = 1  # spawn key separating sampling draws from init draws
_MAX_REJECTION_ROUNDS = 200


@dataclass(frozen=True)
class Domain:
    """Axis-aligned spatial box, optionally crossed with a time interval."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    time: tuple[float, float] | None = None

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise GeometryError("lo and hi must have the same length")
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise GeometryError(f"empty box: lo={self.lo}, hi={self.hi}")
        if self.time is not None and self.time[0] >= self.time[1]:
            raise GeometryError(f"empty time interval {self.time}")

    @property
    def spatial_dim(self) -> int:
        return len(self.lo)

    @property
    def total_dim(self) -> int:
        return self.spatial_dim + (1 if self.time is not None else 0)


@dataclass(frozen=True)
class BatchSizes:
    interior0: int
    interior1: int
    boundary: int
    initial: int = 0


@dataclass
class SampleBatch:
    """One iteration's collocation points. Face key is (axis, 0 for lo / 1 for hi)."""

    interior0: np.ndarray
    interior1: np.ndarray
    boundary: list[tuple[tuple[int, int], np.ndarray]]
    initial: np.ndarray | None


def face_list(domain: Domain) -> list[tuple[int, int]]:
    return [(axis, side) for axis in range(domain.spatial_dim) for side in (0, 1)]


def _with_time(rng, spatial: np.ndarray, domain: Domain) -> np.ndarray:
    if domain.time is None:
        return spatial
    t = rng.uniform(domain.time[0], domain.time[1], (spatial.shape[0], 1))
    return np.hstack([spatial, t])


def _rejection_fill(rng, n, draw, accept, what):
    out = None
    filled = 0
    for _ in range(_MAX_REJECTION_ROUNDS):
        if filled >= n:
            break
        cand = draw(max(2 * (n - filled), 64))
        keep = cand[accept(cand)]
        if out is None:
            out = np.empty((n, cand.shape[1]))
        take = min(keep.shape[0], n - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
    if filled < n:
        raise GeometryError(f"could not draw {what}: acceptance region looks empty")
    return out


def sample_batch(
    domain: Domain,
    center: tuple[float, ...],
    radius: float,
    sizes: BatchSizes,
    seed: int,
    iteration: int,
) -> SampleBatch:
    """Draw one training batch; deterministic in (seed, iteration)."""
    if len(center) != domain.spatial_dim:
        raise GeometryError(
            f"source center has {len(center)} coords for a "
            f"{domain.spatial_dim}-dimensional domain"
        )
    lo = np.asarray(domain.lo)
    hi = np.asarray(domain.hi)
    c = np.asarray(center)
    box_lo = np.maximum(lo, c - radius)
    box_hi = np.minimum(hi, c + radius)
    if np.any(box_lo >= box_hi):
        raise GeometryError(
            f"source ball (center {center}, radius {radius}) misses the domain"
        )
    rng = np.random.default_rng([seed, _SAMPLE_STREAM, iteration])

    def in_ball(pts):
        return ((pts - c) ** 2).sum(axis=1) <= radius * radius

    near = _rejection_fill(
        rng,
        sizes.interior0,
        lambda m: rng.uniform(box_lo, box_hi, (m, domain.spatial_dim)),
        in_ball,
        "near-source interior points",
    )
    interior0 = _with_time(rng, near, domain)

    far = _rejection_fill(
        rng,
        sizes.interior1,
        lambda m: rng.uniform(lo, hi, (m, domain.spatial_dim)),
        lambda pts: ~in_ball(pts),
        "far interior points",
    )
    interior1 = _with_time(rng, far, domain)

    faces = face_list(domain)
    per_face = sizes.boundary // len(faces)
    extra = sizes.boundary % len(faces)
    boundary = []
    for k, (axis, side) in enumerate(faces):
        count = per_face + (1 if k < extra else 0)
        pts = rng.uniform(lo, hi, (count, domain.spatial_dim))
        pts[:, axis] = hi[axis] if side else lo[axis]
        boundary.append(((axis, side), _with_time(rng, pts, domain)))

    initial = None
    if domain.time is not None and sizes.initial > 0:
        pts = rng.uniform(lo, hi, (sizes.initial, domain.spatial_dim))
        t0 = np.full((sizes.initial, 1), domain.time[0])
        initial = np.hstack([pts, t0])

    return SampleBatch(interior0, interior1, boundary, initial)
