"""Relative L2 metric and wavefront localization."""

import numpy as np
import pytest

from deltapinn.errors import NumericError
from deltapinn.metrics import relative_l2, wavefront_radius


def test_identical_fields_score_zero():
    ref = np.array([[1.0, -2.0], [3.0, 0.5]])
    per, mean = relative_l2(ref.copy(), ref)
    np.testing.assert_array_equal(per, [0.0, 0.0])
    assert mean == 0.0


def test_zero_prediction_scores_one():
    ref = np.array([[1.0, -2.0], [3.0, 0.5], [-1.0, 4.0]])
    per, mean = relative_l2(np.zeros_like(ref), ref)
    np.testing.assert_array_equal(per, [1.0, 1.0])
    assert mean == 1.0


def test_doubled_prediction_scores_one():
    ref = np.array([[1.0], [-0.25], [8.0]])
    per, mean = relative_l2(2.0 * ref, ref)
    np.testing.assert_array_equal(per, [1.0])
    assert mean == 1.0


def test_hand_computed_components_and_mean():
    ref = np.array([[1.0, 2.0], [3.0, -2.0]])
    pred = np.array([[0.0, 2.0], [3.0, 0.0]])
    per, mean = relative_l2(pred, ref)
    np.testing.assert_allclose(per, [1.0 / 4.0, 2.0 / 4.0], rtol=1e-15)
    assert mean == pytest.approx(0.375, rel=1e-15)


def test_mask_excludes_rows_from_both_sums():
    ref = np.array([[1.0], [100.0], [3.0]])
    pred = np.array([[0.5], [0.0], [3.0]])
    per, _ = relative_l2(pred, ref, mask=np.array([True, False, True]))
    assert per[0] == pytest.approx(0.5 / 4.0, rel=1e-15)


def test_one_dimensional_inputs_are_a_single_component():
    per, mean = relative_l2(np.array([1.0, 1.0]), np.array([2.0, 2.0]))
    np.testing.assert_array_equal(per, [0.5])
    assert mean == 0.5


def test_zero_reference_component_is_an_error():
    ref = np.array([[1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(NumericError):
        relative_l2(np.ones_like(ref), ref)


def test_shape_mismatch_is_an_error():
    with pytest.raises(ValueError):
        relative_l2(np.ones((3, 2)), np.ones((3, 3)))


def test_wavefront_radius_finds_ring_peak():
    axis = np.linspace(-1.0, 1.0, 201)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    r = np.hypot(pts[:, 0], pts[:, 1])
    hz = -np.exp(-(((r - 0.4) / 0.02) ** 2))  # negative ring: peak of |Hz|
    assert wavefront_radius(pts, hz) == pytest.approx(0.4, abs=0.015)
