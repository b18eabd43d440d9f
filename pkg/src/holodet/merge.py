"""Remapping per-window detections to the original frame and merging them
into one holistic detection set.

Detection file format, one per line, original-frame pixels, theta radians:

    class score cx cy w h theta layer window
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .assignment import LayerThresholds
from .errors import HolodetError, ParseError
from .geometry import OrientedBox, rotated_nms
from .pyramid import PyramidPlan, TileWindow

FRAMES = ("window", "layer", "original")

_TOKEN = re.compile(r"\S+")


@dataclass(frozen=True)
class Detection:
    """Scored box with provenance for merging and evaluation."""

    box: OrientedBox
    score: float
    label: str = "bridge"
    layer: int = 1
    window: int = 0
    frame: str = "original"

    def __post_init__(self):
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise HolodetError(f"detection score {self.score} outside [0, 1]")
        if self.frame not in FRAMES:
            raise HolodetError(f"unknown frame {self.frame!r}, expected one of {FRAMES}")


def remap_to_original(
    dets: Sequence[Detection],
    windows_by_layer: Mapping[int, Sequence[TileWindow]],
    plan: PyramidPlan,
) -> list[Detection]:
    """Window-frame detections re-expressed in original-image coordinates.

    Composes the window offset and the layer scale on box center and sides;
    theta is unchanged by the similarity transform.
    """
    out = []
    for det in dets:
        if det.frame != "window":
            raise HolodetError(f"expected window-frame detection, got {det.frame!r}")
        try:
            win = windows_by_layer[det.layer][det.window]
        except (KeyError, IndexError):
            raise HolodetError(
                f"unknown provenance: layer {det.layer}, window {det.window}"
            ) from None
        box = det.box.translated(win.x0, win.y0).scaled(plan.scale(det.layer))
        out.append(replace(det, box=box, frame="original"))
    return out


def scale_filter(dets: Sequence[Detection], thresholds: LayerThresholds) -> list[Detection]:
    """Keep a detection only when its longer side lies in its source layer's
    band, so each layer reports only its assigned scale range."""
    kept = []
    for det in dets:
        if det.frame != "original":
            raise HolodetError(f"scale_filter expects original-frame detections")
        if thresholds.accepts(det.layer, det.box.length):
            kept.append(det)
    return kept


def global_merge(
    dets: Sequence[Detection],
    iou_threshold: float = 0.5,
    scope: str = "global",
) -> list[Detection]:
    """Class-wise rotated NMS across layers and windows.

    ``scope`` is ``"global"`` (suppress across all layers, default) or
    ``"per-layer"`` (suppress only within a layer, leaving cross-layer
    dedup to the scale bands). Output is ordered by descending score with
    input-index tie-break.
    """
    if scope not in ("global", "per-layer"):
        raise HolodetError(f"unknown merge scope {scope!r}")
    for det in dets:
        if det.frame != "original":
            raise HolodetError("global_merge expects original-frame detections")

    groups: dict[tuple, list[int]] = {}
    for idx, det in enumerate(dets):
        key = (det.label,) if scope == "global" else (det.label, det.layer)
        groups.setdefault(key, []).append(idx)

    kept_indices: list[int] = []
    for key in sorted(groups, key=str):
        indices = groups[key]
        boxes = [dets[i].box for i in indices]
        scores = [dets[i].score for i in indices]
        for local in rotated_nms(boxes, scores, iou_threshold):
            kept_indices.append(indices[int(local)])

    kept_indices.sort(key=lambda i: (-dets[i].score, i))
    return [dets[i] for i in kept_indices]


def format_detection_line(det: Detection) -> str:
    b = det.box
    return (
        f"{det.label} {det.score:.6f} {b.cx:.4f} {b.cy:.4f} {b.w:.4f} {b.h:.4f} "
        f"{b.theta:.9f} {det.layer} {det.window}"
    )


def parse_detection_line(line: str, path: str = "<detections>", line_no: int = 1) -> Detection:
    tokens = [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(line)]
    if len(tokens) != 9:
        raise ParseError(
            path, line_no, 1,
            f"expected 9 fields (class score cx cy w h theta layer window), got {len(tokens)}",
        )
    label = tokens[0][0]
    numbers = []
    for text, col in tokens[1:7]:
        try:
            numbers.append(float(text))
        except ValueError:
            raise ParseError(path, line_no, col, f"bad number {text!r}") from None
    ints = []
    for text, col in tokens[7:9]:
        try:
            ints.append(int(text))
        except ValueError:
            raise ParseError(path, line_no, col, f"bad index {text!r}") from None
    score, cx, cy, w, h, theta = numbers
    try:
        box = OrientedBox(cx, cy, w, h, theta)
        return Detection(
            box=box, score=score, label=label, layer=ints[0], window=ints[1],
            frame="original",
        )
    except HolodetError as exc:
        raise ParseError(path, line_no, tokens[1][1], str(exc)) from None


def parse_detections(text: str, path: str = "<detections>") -> list[Detection]:
    dets = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        dets.append(parse_detection_line(line, path, line_no))
    return dets


def load_detections(path) -> list[Detection]:
    with open(path, encoding="utf-8") as fh:
        return parse_detections(fh.read(), str(path))


def save_detections(path, dets: Iterable[Detection]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for det in dets:
            fh.write(format_detection_line(det) + "\n")
