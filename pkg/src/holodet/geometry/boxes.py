"""Rotated and axis-aligned box types and conversions.

Canonical rotated-box form used throughout the toolkit: the longer side is
``w``, ``theta`` is the rotation of that side in radians within
[-pi/2, pi/2), axes are image-style (x right, y down). All lengths are
pixels in whatever frame the box currently lives in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidBoxError
from ._kernels import box_corners_array

_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class OrientedBox:
    """Rotated rectangle in canonical long-side-first form."""

    cx: float
    cy: float
    w: float
    h: float
    theta: float

    def __post_init__(self):
        values = (self.cx, self.cy, self.w, self.h, self.theta)
        if not all(math.isfinite(v) for v in values):
            raise InvalidBoxError(f"non-finite box parameters: {values}")
        if not (self.w >= self.h > 0.0):
            raise InvalidBoxError(
                f"expected w >= h > 0, got w={self.w}, h={self.h}; "
                "use canonicalize() for raw parameters"
            )
        if not (-_HALF_PI <= self.theta < _HALF_PI):
            raise InvalidBoxError(
                f"theta={self.theta} outside [-pi/2, pi/2); "
                "use canonicalize() for raw parameters"
            )

    @property
    def length(self) -> float:
        """Longer-side length (the scale used for layer assignment and bins)."""
        return self.w

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def aspect(self) -> float:
        return self.w / self.h

    def corners(self) -> np.ndarray:
        """Four corners, (4, 2), clockwise on screen, starting at the local
        (-w/2, -h/2) corner rotated by theta."""
        return box_corners_array(self.as_array())

    def as_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.w, self.h, self.theta])

    def translated(self, dx: float, dy: float) -> "OrientedBox":
        return OrientedBox(self.cx + dx, self.cy + dy, self.w, self.h, self.theta)

    def scaled(self, factor: float) -> "OrientedBox":
        """Uniform scaling about the frame origin (theta unchanged)."""
        return OrientedBox(
            self.cx * factor, self.cy * factor, self.w * factor, self.h * factor, self.theta
        )


@dataclass(frozen=True)
class AxisBox:
    """Axis-aligned rectangle."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        values = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in values):
            raise InvalidBoxError(f"non-finite box parameters: {values}")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise InvalidBoxError(f"empty axis-aligned box: {values}")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin


def canonicalize(cx, cy, w, h, theta) -> OrientedBox:
    """Build a canonical OrientedBox from raw parameters.

    Accepts sides in any order and any finite angle; the geometric footprint
    is unchanged. Idempotent on already-canonical parameters.
    """
    values = (cx, cy, w, h, theta)
    if not all(math.isfinite(v) for v in values):
        raise InvalidBoxError(f"non-finite box parameters: {values}")
    if w <= 0.0 or h <= 0.0:
        raise InvalidBoxError(f"non-positive box sides: w={w}, h={h}")
    if w < h:
        w, h = h, w
        theta = theta + _HALF_PI
    theta = (theta + _HALF_PI) % math.pi - _HALF_PI
    # float modulo can land exactly on the open bound for tiny negatives
    if theta >= _HALF_PI:
        theta -= math.pi
    elif theta < -_HALF_PI:
        theta += math.pi
    return OrientedBox(float(cx), float(cy), float(w), float(h), float(theta))


def fit_corners(points) -> OrientedBox:
    """Recover a canonical box from four corners in the corners() order.

    Opposite edges are averaged, so slightly non-rectangular quadrilaterals
    (e.g. hand-digitized annotations) fit to their best rectangle.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape != (4, 2):
        raise InvalidBoxError(f"expected 4 corner points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InvalidBoxError("non-finite corner coordinates")
    cx, cy = pts.mean(axis=0)
    side_w = 0.5 * ((pts[1] - pts[0]) + (pts[2] - pts[3]))
    side_h = 0.5 * ((pts[3] - pts[0]) + (pts[2] - pts[1]))
    w = float(np.hypot(*side_w))
    h = float(np.hypot(*side_h))
    theta = float(math.atan2(side_w[1], side_w[0]))
    return canonicalize(float(cx), float(cy), w, h, theta)


def obb_to_hbb(box: OrientedBox) -> AxisBox:
    """Tightest axis-aligned box containing the four corners."""
    pts = box.corners()
    return AxisBox(
        float(pts[:, 0].min()),
        float(pts[:, 1].min()),
        float(pts[:, 0].max()),
        float(pts[:, 1].max()),
    )
