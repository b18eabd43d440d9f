"""Scalar detection losses and the weighted multi-layer assembly.

The oriented total is, per layer m,

    lambda_m * ( (1/N) * sum cls_i  +  (1/N+) * sum w_reg_j * reg_j )

summed over layers; the horizontal variant drops the regression weights.
Layers with no positive samples contribute a zero regression term instead of
dividing by zero (background tiles are routine).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


def focal_loss(p: float, positive: bool, alpha: float = 0.25, gamma: float = 2.0) -> float:
    """Focal classification loss -alpha * (1 - p_t)^gamma * ln(p_t).

    ``p`` is the predicted foreground probability; p_t is ``p`` for positive
    samples and ``1 - p`` otherwise. With gamma=0, alpha=1 this reduces to
    cross-entropy.
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"probability must lie strictly inside (0, 1), got {p}")
    p_t = p if positive else 1.0 - p
    return -alpha * (1.0 - p_t) ** gamma * math.log(p_t)


def smooth_l1(x: float) -> float:
    """0.5 x^2 for |x| < 1, |x| - 0.5 otherwise."""
    if not math.isfinite(x):
        raise ValueError(f"residual must be finite, got {x}")
    ax = abs(x)
    if ax < 1.0:
        return 0.5 * x * x
    return ax - 0.5


@dataclass(frozen=True)
class LayerSamples:
    """Per-sample losses for one pyramid layer.

    ``cls_losses`` covers all N samples; ``reg_losses`` and ``reg_weights``
    cover the N+ positives only.
    """

    layer: int
    cls_losses: np.ndarray
    reg_losses: np.ndarray
    reg_weights: np.ndarray | None = None
    lam: float = 1.0

    def __post_init__(self):
        cls_arr = np.asarray(self.cls_losses, dtype=float)
        reg_arr = np.asarray(self.reg_losses, dtype=float)
        object.__setattr__(self, "cls_losses", cls_arr)
        object.__setattr__(self, "reg_losses", reg_arr)
        if self.reg_weights is not None:
            w = np.asarray(self.reg_weights, dtype=float)
            if w.shape != reg_arr.shape:
                raise ValueError(
                    f"layer {self.layer}: {w.shape[0] if w.ndim else 0} weights "
                    f"for {reg_arr.shape[0] if reg_arr.ndim else 0} regression losses"
                )
            object.__setattr__(self, "reg_weights", w)
        if reg_arr.shape[0] > cls_arr.shape[0]:
            raise ValueError(
                f"layer {self.layer}: more positives ({reg_arr.shape[0]}) than samples "
                f"({cls_arr.shape[0]})"
            )

    @property
    def n(self) -> int:
        return int(self.cls_losses.shape[0])

    @property
    def n_pos(self) -> int:
        return int(self.reg_losses.shape[0])


@dataclass(frozen=True)
class LayerLoss:
    layer: int
    cls_sum: float
    reg_sum: float  # weighted sum for the oriented task
    n: int
    n_pos: int
    lam: float
    total: float


@dataclass(frozen=True)
class LossBreakdown:
    layers: tuple[LayerLoss, ...]
    total: float


def _assemble(layers: Sequence[LayerSamples], weighted: bool) -> LossBreakdown:
    per_layer = []
    total = 0.0
    for ls in layers:
        cls_sum = float(ls.cls_losses.sum())
        if weighted:
            if ls.reg_weights is None:
                raise ValueError(
                    f"layer {ls.layer}: oriented loss needs regression weights"
                )
            reg_sum = float((ls.reg_weights * ls.reg_losses).sum())
        else:
            reg_sum = float(ls.reg_losses.sum())
        cls_term = cls_sum / ls.n if ls.n > 0 else 0.0
        reg_term = reg_sum / ls.n_pos if ls.n_pos > 0 else 0.0
        layer_total = ls.lam * (cls_term + reg_term)
        per_layer.append(
            LayerLoss(
                layer=ls.layer,
                cls_sum=cls_sum,
                reg_sum=reg_sum,
                n=ls.n,
                n_pos=ls.n_pos,
                lam=ls.lam,
                total=layer_total,
            )
        )
        total += layer_total
    return LossBreakdown(layers=tuple(per_layer), total=total)


def total_loss_oriented(layers: Sequence[LayerSamples]) -> LossBreakdown:
    """Multi-layer oriented-task total with shape-sensitive weights applied."""
    return _assemble(layers, weighted=True)


def total_loss_horizontal(layers: Sequence[LayerSamples]) -> LossBreakdown:
    """Horizontal-task total: identical assembly with unit regression weights."""
    return _assemble(layers, weighted=False)
