"""Accuracy metrics used by evaluation and the training loop."""

from __future__ import annotations

import numpy as np

from .errors import NumericError

__all__ = ["relative_l2", "wavefront_radius"]


def relative_l2(
    prediction: np.ndarray,
    reference: np.ndarray,
    mask: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Per-component sum_j |ref_j - pred_j| / sum_j |ref_j|, and their mean.

    The point norm is taken per output component, so each component gets its
    own error; masked-out rows (mask False) enter neither sum.
    """
    pred = np.atleast_2d(np.asarray(prediction, dtype=float).T).T
    ref = np.atleast_2d(np.asarray(reference, dtype=float).T).T
    if pred.shape != ref.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {ref.shape}")
    if mask is not None:
        keep = np.asarray(mask, dtype=bool)
        pred, ref = pred[keep], ref[keep]
    num = np.sum(np.abs(ref - pred), axis=0)
    den = np.sum(np.abs(ref), axis=0)
    if np.any(den == 0.0):
        raise NumericError("relative L2 undefined: reference component is all zero")
    per_component = num / den
    return per_component, float(np.mean(per_component))


def wavefront_radius(points: np.ndarray, field: np.ndarray) -> float:
    """Distance from the origin of the strongest |field| sample."""
    points = np.asarray(points, dtype=float)
    idx = int(np.argmax(np.abs(np.asarray(field)).ravel()))
    return float(np.hypot(points[idx, 0], points[idx, 1]))
