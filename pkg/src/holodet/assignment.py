"""Scale-banded allocation of ground-truth boxes to pyramid layers and
sliding windows.

Layer m accepts labels whose longer side (original-image pixels) falls in
[min_base * 2^(m-1), max_length); a label may join several layers. Labels
outside every band are dropped and reported rather than lost silently. A
label attaches to every window whose area contains its center, so labels in
overlap regions are deliberately duplicated (the merge stage deduplicates).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError
from .geometry import OrientedBox
from .pyramid import PyramidPlan, TileWindow, project_box

DEFAULT_MIN_BASE = 15.0
DEFAULT_MAX_LENGTH = 1448.0  # window diagonal: 1024 * sqrt(2)


@dataclass(frozen=True)
class LayerThresholds:
    """Per-layer [min, max) bands in original-image pixels."""

    bands: tuple[tuple[float, float], ...]

    def __post_init__(self):
        mins = [lo for lo, _ in self.bands]
        if any(b <= a for a, b in zip(mins, mins[1:])):
            raise ConfigError(f"layer minimums must be strictly increasing, got {mins}")

    @classmethod
    def for_layers(
        cls,
        n_layers: int,
        min_base: float = DEFAULT_MIN_BASE,
        max_length: float = DEFAULT_MAX_LENGTH,
    ) -> "LayerThresholds":
        if n_layers < 1:
            raise ConfigError(f"need at least one layer, got {n_layers}")
        if min_base <= 0 or max_length <= min_base:
            raise ConfigError(
                f"need 0 < min_base < max_length, got {min_base}, {max_length}"
            )
        return cls(tuple((min_base * 2.0 ** (m - 1), max_length) for m in range(1, n_layers + 1)))

    @property
    def n_layers(self) -> int:
        return len(self.bands)

    def band(self, layer: int) -> tuple[float, float]:
        if not 1 <= layer <= len(self.bands):
            raise ConfigError(f"layer {layer} outside 1..{len(self.bands)}")
        return self.bands[layer - 1]

    def accepts(self, layer: int, length: float) -> bool:
        lo, hi = self.band(layer)
        return lo <= length < hi


@dataclass(frozen=True)
class AssignedLabel:
    """One label on one layer: original index plus the layer-frame box."""

    index: int
    box: OrientedBox


@dataclass(frozen=True)
class DroppedLabel:
    index: int
    length: float
    reason: str


@dataclass(frozen=True)
class LayerAssignment:
    per_layer: tuple[tuple[AssignedLabel, ...], ...]
    dropped: tuple[DroppedLabel, ...]

    def layer(self, m: int) -> tuple[AssignedLabel, ...]:
        return self.per_layer[m - 1]


def assign_to_layers(
    labels: Sequence[OrientedBox],
    plan: PyramidPlan,
    thresholds: LayerThresholds | None = None,
) -> LayerAssignment:
    """Group original-frame labels by layer band, projecting each into the
    layer frame it joins."""
    if thresholds is None:
        thresholds = LayerThresholds.for_layers(plan.n_layers)
    if thresholds.n_layers < plan.n_layers:
        raise ConfigError(
            f"thresholds cover {thresholds.n_layers} layers, plan has {plan.n_layers}"
        )

    per_layer: list[list[AssignedLabel]] = [[] for _ in range(plan.n_layers)]
    dropped: list[DroppedLabel] = []
    for idx, box in enumerate(labels):
        length = box.length
        hit = False
        for m in range(1, plan.n_layers + 1):
            if thresholds.accepts(m, length):
                per_layer[m - 1].append(AssignedLabel(idx, project_box(box, plan, m)))
                hit = True
        if not hit:
            lo0 = thresholds.band(1)[0]
            hi0 = thresholds.band(1)[1]
            reason = "below minimum band" if length < lo0 else (
                "above maximum band" if length >= hi0 else "no matching band"
            )
            dropped.append(DroppedLabel(idx, length, reason))
    return LayerAssignment(
        per_layer=tuple(tuple(group) for group in per_layer),
        dropped=tuple(dropped),
    )


def assign_to_windows(
    layer_labels: Sequence[AssignedLabel],
    windows: Sequence[TileWindow],
) -> list[list[AssignedLabel]]:
    """Attach layer-frame labels to windows by the center-inside rule.

    Window boundaries are inclusive, so a center in an overlap region (or
    exactly on a shared border) attaches to every window covering it. The
    attached boxes are re-expressed in window coordinates.
    """
    out: list[list[AssignedLabel]] = [[] for _ in windows]
    for label in layer_labels:
        for w_idx, win in enumerate(windows):
            if win.contains(label.box.cx, label.box.cy):
                out[w_idx].append(
                    AssignedLabel(label.index, label.box.translated(-win.x0, -win.y0))
                )
    return out


def format_drop_report(dropped: Sequence[DroppedLabel]) -> str:
    lines = [f"dropped {len(dropped)}"]
    for d in dropped:
        lines.append(f"{d.index} {d.length:.3f} {d.reason}")
    return "\n".join(lines) + "\n"
