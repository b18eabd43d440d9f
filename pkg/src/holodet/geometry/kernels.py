"""Public rotated-IoU and rotated-NMS entry points.

Thin wrappers around the backend-compiled kernels in ``_kernels``; sorting
and index bookkeeping stay in numpy so tie-breaking is deterministic and
identical on both backends.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .._backend import active_backend  # noqa: F401  (re-exported)
from . import _kernels
from .boxes import OrientedBox


def boxes_to_array(boxes) -> np.ndarray:
    """Stack OrientedBox values (or raw rows) into a C-contiguous (N, 5) array."""
    if isinstance(boxes, np.ndarray):
        arr = np.ascontiguousarray(boxes, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 5:
            raise ValueError(f"expected (N, 5) box array, got shape {arr.shape}")
        return arr
    rows = [b.as_array() if isinstance(b, OrientedBox) else np.asarray(b, dtype=float) for b in boxes]
    if not rows:
        return np.zeros((0, 5))
    return np.ascontiguousarray(np.stack(rows))


def rotated_iou(a, b) -> float:
    """IoU of two rotated boxes via convex clipping; symmetric, in [0, 1]."""
    arr_a = a.as_array() if isinstance(a, OrientedBox) else np.asarray(a, dtype=float)
    arr_b = b.as_array() if isinstance(b, OrientedBox) else np.asarray(b, dtype=float)
    return float(_kernels.pair_iou(arr_a, arr_b))


def rotated_iou_matrix(boxes_a, boxes_b) -> np.ndarray:
    """Pairwise IoU matrix, shape (len(a), len(b))."""
    arr_a = boxes_to_array(boxes_a)
    arr_b = boxes_to_array(boxes_b)
    if arr_a.shape[0] == 0 or arr_b.shape[0] == 0:
        return np.zeros((arr_a.shape[0], arr_b.shape[0]))
    return _kernels.iou_matrix(arr_a, arr_b)


def rotated_nms(boxes, scores: Sequence[float], iou_threshold: float) -> np.ndarray:
    """Greedy rotated NMS.

    Returns kept indices into the input, ordered by descending score; equal
    scores keep the lower original index first. No two kept boxes overlap
    with IoU strictly above ``iou_threshold``.
    """
    arr = boxes_to_array(boxes)
    score_arr = np.asarray(scores, dtype=float)
    if score_arr.shape != (arr.shape[0],):
        raise ValueError(
            f"scores shape {score_arr.shape} does not match {arr.shape[0]} boxes"
        )
    if not np.all(np.isfinite(score_arr)):
        raise ValueError("non-finite detection scores")
    if arr.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    order = np.argsort(-score_arr, kind="stable").astype(np.int64)
    keep = _kernels.nms_keep(arr, order, float(iou_threshold))
    return order[keep]


def warm_kernels() -> None:
    """Trigger JIT compilation of the hot kernels (no-op on the numpy backend)."""
    box = np.array([0.0, 0.0, 2.0, 1.0, 0.1])
    _kernels.pair_iou(box, box)
    pair = np.stack([box, box])
    _kernels.iou_matrix(pair, pair)
    _kernels.nms_keep(pair, np.array([0, 1], dtype=np.int64), 0.5)
