"""Rotated-box geometry: types, conversions, IoU, NMS, annotation I/O."""

from .annotations import (
    Annotation,
    format_annotation_line,
    load_annotations,
    parse_annotation_line,
    parse_annotations,
    save_annotations,
)
from .boxes import AxisBox, OrientedBox, canonicalize, fit_corners, obb_to_hbb
from .kernels import (
    active_backend,
    boxes_to_array,
    rotated_iou,
    rotated_iou_matrix,
    rotated_nms,
    warm_kernels,
)

__all__ = [
    "Annotation",
    "AxisBox",
    "OrientedBox",
    "active_backend",
    "boxes_to_array",
    "canonicalize",
    "fit_corners",
    "format_annotation_line",
    "load_annotations",
    "obb_to_hbb",
    "parse_annotation_line",
    "parse_annotations",
    "rotated_iou",
    "rotated_iou_matrix",
    "rotated_nms",
    "save_annotations",
    "warm_kernels",
]
