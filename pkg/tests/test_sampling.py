"""Sampler geometry and distribution checks."""

import numpy as np
import pytest
from scipy import stats

from deltapinn.errors import GeometryError
from deltapinn.sampling import BatchSizes, Domain, SampleBatch, face_list, sample_batch

SQUARE = Domain(lo=(0.0, 0.0), hi=(np.pi, np.pi))
CENTER = (np.pi / 2, np.pi / 2)
SPACETIME = Domain(lo=(-1.0, -1.0), hi=(1.0, 1.0), time=(0.0, 1.2))


def test_interior0_inside_ball_and_domain():
    b = sample_batch(SQUARE, CENTER, 0.03, BatchSizes(500, 500, 100), seed=0, iteration=0)
    r = np.linalg.norm(b.interior0 - np.asarray(CENTER), axis=1)
    assert r.max() <= 0.03
    assert b.interior0.min() >= 0.0 and b.interior0.max() <= np.pi
    assert b.interior0.shape == (500, 2)


def test_interior1_outside_ball():
    b = sample_batch(SQUARE, CENTER, 0.03, BatchSizes(100, 2000, 100), seed=1, iteration=0)
    r = np.linalg.norm(b.interior1 - np.asarray(CENTER), axis=1)
    assert r.min() > 0.03
    assert b.interior1.shape == (2000, 2)


def test_interior0_mean_radius_is_two_thirds():
    # uniform on a disk of radius R has mean radius 2R/3
    b = sample_batch(
        SQUARE, CENTER, 0.03, BatchSizes(100_000, 1, 4), seed=2, iteration=0
    )
    r = np.linalg.norm(b.interior0 - np.asarray(CENTER), axis=1)
    assert r.mean() == pytest.approx(2.0 * 0.03 / 3.0, rel=0.02)


def test_interior1_spatial_marginal_uniform():
    b = sample_batch(
        SQUARE, CENTER, 0.03, BatchSizes(1, 1_000_000, 4), seed=3, iteration=0
    )
    edges = np.linspace(0.0, np.pi, 11)
    counts, _, _ = np.histogram2d(b.interior1[:, 0], b.interior1[:, 1], bins=[edges, edges])
    expected = b.interior1.shape[0] / 100.0
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < stats.chi2.ppf(0.999, 99)


def test_boundary_faces_exact_and_balanced():
    n = 403
    b = sample_batch(SQUARE, CENTER, 0.03, BatchSizes(4, 4, n), seed=4, iteration=0)
    assert [f for f, _ in b.boundary] == face_list(SQUARE) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    counts = [pts.shape[0] for _, pts in b.boundary]
    assert sum(counts) == n
    assert max(counts) - min(counts) <= 1
    assert counts[0] >= counts[-1]  # remainder goes to the first faces
    for (axis, side), pts in b.boundary:
        want = SQUARE.hi[axis] if side else SQUARE.lo[axis]
        assert np.all(pts[:, axis] == want)
        other = pts[:, 1 - axis]
        assert other.min() >= 0.0 and other.max() <= np.pi


def test_time_coordinate_appended_and_initial_slab():
    b = sample_batch(
        SPACETIME, (0.0, 0.0), 0.03, BatchSizes(50, 50, 40, 30), seed=5, iteration=2
    )
    for pts in (b.interior0, b.interior1):
        assert pts.shape[1] == 3
        assert pts[:, 2].min() >= 0.0 and pts[:, 2].max() <= 1.2
    assert b.initial.shape == (30, 3)
    assert np.all(b.initial[:, 2] == 0.0)
    for _, pts in b.boundary:
        assert pts.shape[1] == 3


def test_steady_domain_has_no_initial_batch():
    b = sample_batch(SQUARE, CENTER, 0.03, BatchSizes(4, 4, 4, 100), seed=6, iteration=0)
    assert b.initial is None


def test_deterministic_in_seed_and_iteration():
    a = sample_batch(SQUARE, CENTER, 0.03, BatchSizes(64, 64, 16), seed=7, iteration=5)
    b = sample_batch(SQUARE, CENTER, 0.03, BatchSizes(64, 64, 16), seed=7, iteration=5)
    c = sample_batch(SQUARE, CENTER, 0.03, BatchSizes(64, 64, 16), seed=7, iteration=6)
    d = sample_batch(SQUARE, CENTER, 0.03, BatchSizes(64, 64, 16), seed=8, iteration=5)
    assert np.array_equal(a.interior0, b.interior0)
    assert np.array_equal(a.interior1, b.interior1)
    for (fa, pa), (fb, pb) in zip(a.boundary, b.boundary):
        assert fa == fb and np.array_equal(pa, pb)
    assert not np.array_equal(a.interior0, c.interior0)
    assert not np.array_equal(a.interior0, d.interior0)


def test_source_outside_domain_raises():
    with pytest.raises(GeometryError):
        sample_batch(SQUARE, (7.0, 7.0), 0.03, BatchSizes(4, 4, 4), seed=0, iteration=0)


def test_bad_domain_raises():
    with pytest.raises(GeometryError):
        Domain(lo=(0.0, 0.0), hi=(0.0, 1.0))
    with pytest.raises(GeometryError):
        Domain(lo=(0.0,), hi=(1.0,), time=(2.0, 1.0))
    with pytest.raises(GeometryError):
        sample_batch(SQUARE, (0.5,), 0.03, BatchSizes(4, 4, 4), seed=0, iteration=0)
