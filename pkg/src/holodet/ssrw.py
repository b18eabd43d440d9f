"""Shape-sensitive regression weights for positive samples.

Given a ground-truth box and a positive sample point, the center offset is
projected onto the box's long and short axes; relative offsets r_w = 2w'/w
and r_h = 2h'/h feed the measurement factors Q = ln(r + 1) + 1, and the final
weight is mu * Q_w * Q_h * r where r is the box's aspect ratio normalized by
the batch maximum. Elongated boxes and far-from-center samples get larger
weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import OrientedBox


@dataclass(frozen=True)
class SampleWeightRecord:
    """All intermediates for one (ground truth, sample) pair."""

    x: float
    y: float
    delta_d: float
    w_proj: float
    h_proj: float
    r_w: float
    r_h: float
    q_w: float
    q_h: float
    r: float
    mu: float
    weight: float


def project_offsets(gt: OrientedBox, x: float, y: float) -> tuple[float, float]:
    """Absolute projections of (sample - center) onto the box axes, pixels."""
    dx = x - gt.cx
    dy = y - gt.cy
    cos_t = math.cos(gt.theta)
    sin_t = math.sin(gt.theta)
    w_proj = abs(dx * cos_t + dy * sin_t)
    h_proj = abs(-dx * sin_t + dy * cos_t)
    return (w_proj, h_proj)


def normalize_aspect(batch: Sequence[OrientedBox]) -> np.ndarray:
    """Per-box aspect ratios divided by the batch maximum; in (0, 1]."""
    if len(batch) == 0:
        raise ValueError("cannot normalize aspect ratios of an empty batch")
    aspects = np.array([b.aspect for b in batch])
    return aspects / aspects.max()


def regression_weight(
    gt: OrientedBox,
    x: float,
    y: float,
    r: float = 1.0,
    mu: float = 1.0,
) -> SampleWeightRecord:
    """Full weight record for one sample; ``r`` comes from normalize_aspect."""
    if mu <= 0.0:
        raise ValueError(f"adjustment factor must be positive, got {mu}")
    w_proj, h_proj = project_offsets(gt, x, y)
    r_w = 2.0 * w_proj / gt.w
    r_h = 2.0 * h_proj / gt.h
    q_w = math.log(r_w + 1.0) + 1.0
    q_h = math.log(r_h + 1.0) + 1.0
    weight = mu * q_w * q_h * r
    return SampleWeightRecord(
        x=float(x),
        y=float(y),
        delta_d=math.hypot(x - gt.cx, y - gt.cy),
        w_proj=w_proj,
        h_proj=h_proj,
        r_w=r_w,
        r_h=r_h,
        q_w=q_w,
        q_h=q_h,
        r=float(r),
        mu=float(mu),
        weight=weight,
    )


def weight_table(
    gts: Sequence[OrientedBox],
    samples_per_gt: Sequence[Sequence[tuple[float, float]]],
    mu: float = 1.0,
) -> list[tuple[int, SampleWeightRecord]]:
    """Records for every (gt, sample) pair with r normalized over ``gts``."""
    if len(gts) != len(samples_per_gt):
        raise ValueError(
            f"{len(gts)} ground truths but {len(samples_per_gt)} sample groups"
        )
    rs = normalize_aspect(gts)
    out = []
    for idx, (gt, samples) in enumerate(zip(gts, samples_per_gt)):
        for (x, y) in samples:
            out.append((idx, regression_weight(gt, x, y, r=float(rs[idx]), mu=mu)))
    return out
