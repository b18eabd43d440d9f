"""Inter-layer feature fusion arithmetic on synthetic feature tensors.

Feature grids are indexed by pyramid layer j (1 = full resolution) and
feature level i (stride 2^i within its own image), so a cell's effective
stride over the original image is sigma^(j-1) * 2^i. When the pyramid ratio
equals the level ratio (sigma = 2), the triples

    upper (j-1, i+1)   mid (j, i)   lower (j+1, i-1)

share one effective stride and can be fused cell-for-cell.

Alignment works on the mid layer's full-extent grid. The upper (finer) layer
contributes per-window features one level below the shared stride: they are
mosaicked at their window offsets (overlap cells averaged, row-major window
order) onto a canvas twice the mid grid, then 2x average pooling brings the
mosaic down to the shared stride. Lower-layer windows already sit on the
shared stride and are placed directly at their offsets; mid cells no lower
window covers stay zero. Exact cell alignment requires window origins
divisible by the mosaic stride, which holds for the zero-overlap tilings the
demo uses.

Fusion concatenates the three aligned grids channel-wise, applies a caller
supplied 1x1 linear mix, and a sigmoid; the result replaces the mid grid.
Grids that cannot form a full triple pass through untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .pyramid import PyramidPlan, TileWindow, tile_layer


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def grid_shape(pixels_h: int, pixels_w: int, level: int) -> tuple[int, int]:
    """Spatial shape of a level-``level`` grid over an image of given size."""
    s = 2 ** level
    return (_ceil_div(pixels_h, s), _ceil_div(pixels_w, s))


@dataclass(frozen=True)
class FeatureMap:
    """Full-extent feature grid of one pyramid layer at one level."""

    layer: int
    level: int
    data: np.ndarray  # (C, H, W)

    def __post_init__(self):
        if self.data.ndim != 3:
            raise ConfigError(f"feature data must be (C, H, W), got {self.data.shape}")

    def effective_stride(self, sigma: float) -> float:
        return sigma ** (self.layer - 1) * 2 ** self.level


@dataclass(frozen=True)
class WindowedFeature:
    """Feature grid of one sliding window of one pyramid layer."""

    window: TileWindow
    level: int
    data: np.ndarray  # (C, h, w)

    def __post_init__(self):
        s = 2 ** self.level
        if self.window.width % s or self.window.height % s:
            raise ConfigError(
                f"window {self.window.width}x{self.window.height} not divisible "
                f"by level-{self.level} stride {s}"
            )
        expect = (self.window.height // s, self.window.width // s)
        if self.data.ndim != 3 or self.data.shape[1:] != expect:
            raise ConfigError(
                f"window feature shape {self.data.shape} does not match "
                f"(C, {expect[0]}, {expect[1]})"
            )


@dataclass(frozen=True)
class CandidateIndex:
    """Index triple for one fusion site; ``layer``/``level`` address the mid."""

    layer: int
    level: int

    @property
    def upper(self) -> tuple[int, int]:
        return (self.layer - 1, self.level + 1)

    @property
    def lower(self) -> tuple[int, int]:
        return (self.layer + 1, self.level - 1)


@dataclass(frozen=True)
class SelectionResult:
    sets: tuple[CandidateIndex, ...]
    passthrough: tuple[tuple[int, int], ...]  # (layer, level) grids left untouched


def select_candidates(
    levels_by_layer: Mapping[int, Sequence[int]],
    sigma: float,
    fpn_ratio: float = 2.0,
) -> SelectionResult:
    """Enumerate fusable triples over per-layer level listings.

    A grid (j, i) becomes a fusion mid only when both neighbors exist: level
    i+1 in layer j-1 and level i-1 in layer j+1. Everything else passes
    through. The level ratio must equal the pyramid ratio or the strides can
    never line up.
    """
    if not math.isclose(sigma, fpn_ratio, rel_tol=1e-12):
        raise ConfigError(
            f"feature-level ratio {fpn_ratio} must equal pyramid ratio {sigma} "
            "for candidate strides to match"
        )
    sets = []
    passthrough = []
    for j in sorted(levels_by_layer):
        levels = set(levels_by_layer[j])
        upper_levels = set(levels_by_layer.get(j - 1, ()))
        lower_levels = set(levels_by_layer.get(j + 1, ()))
        for i in sorted(levels):
            if (i + 1) in upper_levels and (i - 1) in lower_levels:
                sets.append(CandidateIndex(layer=j, level=i))
            else:
                passthrough.append((j, i))
    return SelectionResult(sets=tuple(sets), passthrough=tuple(passthrough))


@dataclass(frozen=True)
class CandidateSet:
    """Data for one fusion site.

    ``upper_windows`` carry the upper layer's window grids one level finer
    than the shared stride (level i); alignment's 2x pooling reduces them to
    the shared stride. ``lower_windows`` carry level i-1 grids of the lower
    layer, already on the shared stride.
    """

    index: CandidateIndex
    mid: FeatureMap
    upper_windows: tuple[WindowedFeature, ...]
    lower_windows: tuple[WindowedFeature, ...]

    def __post_init__(self):
        j, i = self.index.layer, self.index.level
        if (self.mid.layer, self.mid.level) != (j, i):
            raise ConfigError(
                f"mid grid is ({self.mid.layer}, {self.mid.level}), expected ({j}, {i})"
            )
        channels = self.mid.data.shape[0]
        for wf in self.upper_windows:
            if wf.window.layer != j - 1 or wf.level != i:
                raise ConfigError(
                    f"upper window at (layer {wf.window.layer}, level {wf.level}), "
                    f"expected (layer {j - 1}, level {i})"
                )
            if wf.data.shape[0] != channels:
                raise ConfigError("channel count mismatch in upper windows")
        for wf in self.lower_windows:
            if wf.window.layer != j + 1 or wf.level != i - 1:
                raise ConfigError(
                    f"lower window at (layer {wf.window.layer}, level {wf.level}), "
                    f"expected (layer {j + 1}, level {i - 1})"
                )
            if wf.data.shape[0] != channels:
                raise ConfigError("channel count mismatch in lower windows")


@dataclass(frozen=True)
class AlignedTriple:
    """Three same-shape grids on the mid layout plus placement descriptors."""

    upper: np.ndarray
    mid: np.ndarray
    lower: np.ndarray
    upper_rect: tuple[int, int, int, int] | None
    lower_rects: tuple[tuple[int, int, int, int], ...]


def _accumulate(sums, counts, data, r0, c0):
    """Add a window grid at (r0, c0), clipped to the canvas; returns the
    placed rectangle or None if fully outside."""
    _, h, w = data.shape
    canvas_h, canvas_w = counts.shape
    rr0, cc0 = max(r0, 0), max(c0, 0)
    rr1, cc1 = min(r0 + h, canvas_h), min(c0 + w, canvas_w)
    if rr1 <= rr0 or cc1 <= cc0:
        return None
    sums[:, rr0:rr1, cc0:cc1] += data[:, rr0 - r0 : rr1 - r0, cc0 - c0 : cc1 - c0]
    counts[rr0:rr1, cc0:cc1] += 1
    return (rr0, cc0, rr1, cc1)


def _resolve(sums, counts):
    out = np.zeros_like(sums)
    covered = counts > 0
    out[:, covered] = sums[:, covered] / counts[covered]
    return out


def average_pool_2x(data: np.ndarray) -> np.ndarray:
    c, h, w = data.shape
    if h % 2 or w % 2:
        raise ConfigError(f"cannot 2x-pool odd spatial shape {data.shape}")
    return data.reshape(c, h // 2, 2, w // 2, 2).mean(axis=(2, 4))


def align(cset: CandidateSet) -> AlignedTriple:
    """Bring all three members onto the mid grid.

    Upper windows are mosaicked (overlaps averaged) onto a 2x canvas and
    average-pooled down; lower windows are placed cell-for-cell with zero
    fill outside their coverage.
    """
    i = cset.index.level
    channels, mid_h, mid_w = cset.mid.data.shape

    upper_sums = np.zeros((channels, 2 * mid_h, 2 * mid_w))
    upper_counts = np.zeros((2 * mid_h, 2 * mid_w))
    mosaic_stride = 2 ** i
    placed = []
    for wf in cset.upper_windows:
        r0 = wf.window.y0 // mosaic_stride
        c0 = wf.window.x0 // mosaic_stride
        rect = _accumulate(upper_sums, upper_counts, wf.data, r0, c0)
        if rect is not None:
            placed.append(rect)
    upper = average_pool_2x(_resolve(upper_sums, upper_counts))
    if placed:
        upper_rect = (
            min(r[0] for r in placed) // 2,
            min(r[1] for r in placed) // 2,
            _ceil_div(max(r[2] for r in placed), 2),
            _ceil_div(max(r[3] for r in placed), 2),
        )
    else:
        upper_rect = None

    lower_sums = np.zeros((channels, mid_h, mid_w))
    lower_counts = np.zeros((mid_h, mid_w))
    lower_stride = 2 ** (i - 1)
    lower_rects = []
    for wf in cset.lower_windows:
        r0 = wf.window.y0 // lower_stride
        c0 = wf.window.x0 // lower_stride
        rect = _accumulate(lower_sums, lower_counts, wf.data, r0, c0)
        if rect is not None:
            lower_rects.append(rect)
    lower = _resolve(lower_sums, lower_counts)

    return AlignedTriple(
        upper=upper,
        mid=cset.mid.data,
        lower=lower,
        upper_rect=upper_rect,
        lower_rects=tuple(lower_rects),
    )


def fuse(triple: AlignedTriple, mix_weights: np.ndarray) -> np.ndarray:
    """Concatenate (upper, mid, lower) channels, 1x1 mix, sigmoid.

    ``mix_weights`` has shape (C_out, 3 * C_in); the output replaces the mid
    grid, so C_out normally equals C_in.
    """
    if triple.upper.shape != triple.mid.shape or triple.lower.shape != triple.mid.shape:
        raise ConfigError(
            f"aligned shapes differ: {triple.upper.shape}, {triple.mid.shape}, "
            f"{triple.lower.shape}"
        )
    cat = np.concatenate([triple.upper, triple.mid, triple.lower], axis=0)
    weights = np.asarray(mix_weights, dtype=float)
    if weights.ndim != 2 or weights.shape[1] != cat.shape[0]:
        raise ConfigError(
            f"mix weights shape {weights.shape} incompatible with {cat.shape[0]} "
            "concatenated channels"
        )
    mixed = np.tensordot(weights, cat, axes=(1, 0))
    return 1.0 / (1.0 + np.exp(-mixed))


def fuse_candidate(cset: CandidateSet, mix_weights: np.ndarray) -> FeatureMap:
    """Align + fuse, returning the updated mid grid."""
    fused = fuse(align(cset), mix_weights)
    return FeatureMap(layer=cset.index.layer, level=cset.index.level, data=fused)


def mid_identity_weights(channels: int) -> np.ndarray:
    """Mix weights selecting the mid member unchanged (before the sigmoid)."""
    weights = np.zeros((channels, 3 * channels))
    for k in range(channels):
        weights[k, channels + k] = 1.0
    return weights


# ---------------------------------------------------------------------------
# synthetic inputs for the demo CLI and the certification tests


def build_candidate_set(
    plan: PyramidPlan,
    index: CandidateIndex,
    channels: int,
    overlap: int = 0,
    rng: np.random.Generator | None = None,
) -> CandidateSet:
    """Synthetic candidate set over a plan: zero-filled, or random when a
    generator is supplied."""
    j, i = index.layer, index.level
    if not 2 <= j <= plan.n_layers - 1:
        raise ConfigError(f"mid layer {j} needs both neighbors in 1..{plan.n_layers}")

    def _fill(shape):
        if rng is None:
            return np.zeros(shape)
        return rng.standard_normal(shape)

    mid_h, mid_w = grid_shape(*plan.layer_size(j), i)
    mid = FeatureMap(layer=j, level=i, data=_fill((channels, mid_h, mid_w)))

    upper_windows = []
    for win in tile_layer(plan, j - 1, overlap):
        s = 2 ** i
        upper_windows.append(
            WindowedFeature(
                window=win,
                level=i,
                data=_fill((channels, win.height // s, win.width // s)),
            )
        )
    lower_windows = []
    for win in tile_layer(plan, j + 1, overlap):
        s = 2 ** (i - 1)
        lower_windows.append(
            WindowedFeature(
                window=win,
                level=i - 1,
                data=_fill((channels, win.height // s, win.width // s)),
            )
        )
    return CandidateSet(
        index=index,
        mid=mid,
        upper_windows=tuple(upper_windows),
        lower_windows=tuple(lower_windows),
    )


def plant_impulse(
    cset: CandidateSet,
    plan: PyramidPlan,
    x: float,
    y: float,
    value: float = 1.0,
    channel: int = 0,
) -> tuple[int, int]:
    """Write an impulse at original-image point (x, y) into all three members.

    Returns the mid-grid cell the impulse should occupy after alignment.
    """
    j, i = cset.index.layer, cset.index.level
    stride = plan.sigma ** (j - 1) * 2 ** i
    row = int(y // stride)
    col = int(x // stride)
    cset.mid.data[channel, row, col] += value

    ux = x / plan.sigma ** (j - 2)
    uy = y / plan.sigma ** (j - 2)
    s = 2 ** i
    for wf in cset.upper_windows:
        win = wf.window
        if win.x0 <= ux < win.x0 + win.width and win.y0 <= uy < win.y0 + win.height:
            wf.data[channel, int((uy - win.y0) // s), int((ux - win.x0) // s)] += value

    lx = x / plan.sigma ** j
    ly = y / plan.sigma ** j
    s = 2 ** (i - 1)
    for wf in cset.lower_windows:
        win = wf.window
        if win.x0 <= lx < win.x0 + win.width and win.y0 <= ly < win.y0 + win.height:
            wf.data[channel, int((ly - win.y0) // s), int((lx - win.x0) // s)] += value

    return (row, col)


def impulse_cells(triple: AlignedTriple, channel: int = 0) -> tuple[tuple[int, int], ...]:
    """Peak cell of each aligned member (for spatial-consistency checks)."""
    cells = []
    for grid in (triple.upper, triple.mid, triple.lower):
        flat = int(np.argmax(np.abs(grid[channel])))
        cells.append((flat // grid.shape[2], flat % grid.shape[2]))
    return tuple(cells)
