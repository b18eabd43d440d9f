"""Dynamic image pyramid planning, sliding-window tiling, and the exact
coordinate transforms among window, layer, and original frames.

A pyramid downsamples the original image by a fixed ratio per layer and
terminates at the first layer whose height or width drops to the window
size. Layer 1 is always the full-resolution image. Layer sizes are the real
values rounded to nearest (the termination test uses the exact real value,
so rounding can never change the layer count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .geometry import OrientedBox


@dataclass(frozen=True)
class PyramidPlan:
    height: int
    width: int
    sigma: float
    window_height: int
    window_width: int
    n_layers: int
    layer_sizes: tuple[tuple[int, int], ...]  # (height, width) per layer, layer 1 first

    def scale(self, layer: int) -> float:
        """Layer-to-original coordinate multiplier for 1-based ``layer``."""
        self._check_layer(layer)
        return self.sigma ** (layer - 1)

    def layer_size(self, layer: int) -> tuple[int, int]:
        self._check_layer(layer)
        return self.layer_sizes[layer - 1]

    def _check_layer(self, layer: int) -> None:
        if not 1 <= layer <= self.n_layers:
            raise ConfigError(f"layer {layer} outside 1..{self.n_layers}")


@dataclass(frozen=True)
class TileWindow:
    """One fixed-size window placement on one pyramid layer."""

    layer: int
    x0: int
    y0: int
    width: int
    height: int
    scale: float  # layer -> original multiplier

    def to_original(self, x: float, y: float) -> tuple[float, float]:
        return ((self.x0 + x) * self.scale, (self.y0 + y) * self.scale)

    def from_layer(self, x: float, y: float) -> tuple[float, float]:
        return (x - self.x0, y - self.y0)

    def contains(self, x: float, y: float) -> bool:
        """Layer-frame point inside the window (boundaries inclusive)."""
        return (
            self.x0 <= x <= self.x0 + self.width
            and self.y0 <= y <= self.y0 + self.height
        )


def _round_dim(value: float) -> int:
    # nearest integer, ties up, never below 1
    return max(1, int(math.floor(value + 0.5)))


def plan_pyramid(
    height: int,
    width: int,
    sigma: float = 2.0,
    window_height: int = 1024,
    window_width: int = 1024,
) -> PyramidPlan:
    """Plan the pyramid for an ``height`` x ``width`` image.

    The layer count is the smallest n with height/sigma^(n-1) <= window
    height or width/sigma^(n-1) <= window width, tested on exact real
    values. An image already within the window yields a single layer.
    """
    if height < 1 or width < 1:
        raise ConfigError(f"image size {height}x{width} must be at least 1x1")
    if not (sigma > 1.0):
        raise ConfigError(f"downsampling ratio must exceed 1, got {sigma}")
    if window_height < 1 or window_width < 1:
        raise ConfigError("termination thresholds must be at least 1 pixel")

    sizes = []
    n = 1
    while True:
        real_h = height / sigma ** (n - 1)
        real_w = width / sigma ** (n - 1)
        if n == 1:
            sizes.append((int(height), int(width)))
        else:
            sizes.append((_round_dim(real_h), _round_dim(real_w)))
        if real_h <= window_height or real_w <= window_width:
            break
        n += 1

    return PyramidPlan(
        height=int(height),
        width=int(width),
        sigma=float(sigma),
        window_height=int(window_height),
        window_width=int(window_width),
        n_layers=n,
        layer_sizes=tuple(sizes),
    )


def _axis_origins(size: int, window: int, stride: int) -> list[int]:
    if size <= window:
        return [0]
    origins = []
    x = 0
    while True:
        if x + window >= size:
            origins.append(size - window)
            break
        origins.append(x)
        x += stride
    return origins


def tile_layer(plan: PyramidPlan, layer: int, overlap: int = 200) -> list[TileWindow]:
    """Sliding windows covering one layer, row-major order.

    Stride is window minus overlap per axis; the final row/column windows are
    shifted back (not shrunk) to end exactly at the layer edge, so every
    window keeps the full detector input size. Only when the layer itself is
    smaller than the window in an axis is the window clamped to the layer.
    """
    plan._check_layer(layer)
    if not 0 <= overlap < min(plan.window_height, plan.window_width):
        raise ConfigError(
            f"overlap {overlap} outside [0, {min(plan.window_height, plan.window_width)})"
        )
    layer_h, layer_w = plan.layer_size(layer)
    win_h = min(plan.window_height, layer_h)
    win_w = min(plan.window_width, layer_w)
    xs = _axis_origins(layer_w, plan.window_width, plan.window_width - overlap)
    ys = _axis_origins(layer_h, plan.window_height, plan.window_height - overlap)
    scale = plan.scale(layer)
    return [
        TileWindow(layer=layer, x0=x, y0=y, width=win_w, height=win_h, scale=scale)
        for y in ys
        for x in xs
    ]


def window_to_original(win: TileWindow, x: float, y: float) -> tuple[float, float]:
    return win.to_original(x, y)


def original_to_layer(plan: PyramidPlan, layer: int, x: float, y: float) -> tuple[float, float]:
    s = plan.scale(layer)
    return (x / s, y / s)


def project_box(box: OrientedBox, plan: PyramidPlan, layer: int) -> OrientedBox:
    """Original-frame box expressed in layer-frame pixels (theta unchanged)."""
    return box.scaled(1.0 / plan.scale(layer))


def back_project_box(box: OrientedBox, plan: PyramidPlan, layer: int) -> OrientedBox:
    """Inverse of :func:`project_box`."""
    return box.scaled(plan.scale(layer))
