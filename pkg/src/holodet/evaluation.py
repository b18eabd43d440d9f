"""Detection evaluation: greedy IoU matching, precision-recall curves,
11-point interpolated AP, the 0.50:0.05:0.95 sweep, and length-binned APs.

Protocol notes, pinned here and mirrored by the test oracles:

- Detections are processed in descending score order (ties keep input
  order; across images, images are visited in sorted-key order). A detection
  matches the unmatched ground truth with the highest IoU when that IoU
  reaches the threshold, otherwise it is a false positive. Each ground truth
  matches at most once.
- Length-binned APs restrict ground truths to the bin by longer-side length.
  A detection that fails to match an unmatched in-bin ground truth but
  overlaps any out-of-bin ground truth at the threshold is ignored (neither
  TP nor FP), the standard protocol for size-restricted metrics.
- A bin or class with no ground truths has no defined AP and is reported as
  absent, never zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geometry import OrientedBox, rotated_iou_matrix
from .merge import Detection


def map_sweep() -> tuple[float, ...]:
    """COCO-style IoU thresholds 0.50:0.05:0.95."""
    return tuple(round(0.5 + 0.05 * k, 2) for k in range(10))


@dataclass(frozen=True)
class GroundTruth:
    box: OrientedBox
    label: str = "bridge"


@dataclass(frozen=True)
class LengthBins:
    """Right-closed, contiguous longer-side intervals."""

    names: tuple[str, ...]
    edges: tuple[float, ...]

    def __post_init__(self):
        if len(self.names) != len(self.edges) - 1:
            raise ValueError(
                f"{len(self.names)} names need {len(self.names) + 1} edges, "
                f"got {len(self.edges)}"
            )
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValueError(f"edges must increase strictly: {self.edges}")

    @classmethod
    def default(cls) -> "LengthBins":
        return cls(
            names=("short", "middle", "large", "huge"),
            edges=(0.0, 50.0, 200.0, 800.0, 16384.0),
        )

    @classmethod
    def from_edges(cls, edges: Sequence[float]) -> "LengthBins":
        inner = tuple(float(e) for e in edges)
        if len(inner) == 4:
            names: tuple[str, ...] = ("short", "middle", "large", "huge")
        else:
            names = tuple(f"bin{k + 1}" for k in range(len(inner)))
        return cls(names=names, edges=(0.0, *inner))

    @property
    def intervals(self) -> tuple[tuple[str, float, float], ...]:
        return tuple(
            (name, self.edges[k], self.edges[k + 1]) for k, name in enumerate(self.names)
        )

    def bin_of(self, length: float) -> str | None:
        for name, lo, hi in self.intervals:
            if lo < length <= hi:
                return name
        return None


@dataclass(frozen=True)
class MatchResult:
    """Per-detection flags (input order) plus the unmatched-gt count."""

    tp: np.ndarray
    fp: np.ndarray
    fn: int
    matched_gt: np.ndarray  # gt index per detection, -1 when unmatched


def match(dets: Sequence[Detection], gts, iou_threshold: float) -> MatchResult:
    """Greedy matching for one image, one class.

    ``gts`` may be GroundTruth records or bare boxes.
    """
    gt_boxes = [g.box if isinstance(g, GroundTruth) else g for g in gts]
    n_det = len(dets)
    n_gt = len(gt_boxes)
    tp = np.zeros(n_det, dtype=bool)
    fp = np.zeros(n_det, dtype=bool)
    matched_gt = np.full(n_det, -1, dtype=int)
    if n_det == 0:
        return MatchResult(tp, fp, n_gt, matched_gt)

    scores = np.array([d.score for d in dets])
    order = np.argsort(-scores, kind="stable")
    ious = (
        rotated_iou_matrix([d.box for d in dets], gt_boxes)
        if n_gt
        else np.zeros((n_det, 0))
    )
    gt_taken = np.zeros(n_gt, dtype=bool)
    for det_idx in order:
        best_gt = -1
        best_iou = 0.0
        for g in range(n_gt):
            if gt_taken[g]:
                continue
            if ious[det_idx, g] > best_iou:
                best_iou = ious[det_idx, g]
                best_gt = g
        if best_gt >= 0 and best_iou >= iou_threshold:
            tp[det_idx] = True
            matched_gt[det_idx] = best_gt
            gt_taken[best_gt] = True
        else:
            fp[det_idx] = True
    return MatchResult(tp, fp, int(n_gt - gt_taken.sum()), matched_gt)


def voc07_ap(recalls, precisions) -> float:
    """11-point interpolated AP: mean over recall grid {0, 0.1, ..., 1.0} of
    the maximum precision at recall >= grid point."""
    rec = np.asarray(recalls, dtype=float)
    prec = np.asarray(precisions, dtype=float)
    ap = 0.0
    for t in np.linspace(0.0, 1.0, 11):
        mask = rec >= t
        p = float(prec[mask].max()) if mask.any() else 0.0
        ap += p / 11.0
    return ap


@dataclass(frozen=True)
class EvalReport:
    ap_by_iou: dict
    ap50: float | None
    ap75: float | None
    map: float | None
    bin_ap: dict
    bin_gt_counts: dict
    tp: int
    fp: int
    fn: int
    n_gts: int
    n_dets: int
    classes: tuple[str, ...]
    pr50: dict = field(default_factory=dict)  # class -> (recalls, precisions)


class _ClassData:
    """Flattened per-class detections and cached IoU matrices."""

    def __init__(self, gts_by_image, dets_by_image, label):
        self.image_keys = sorted(
            set(gts_by_image) | set(dets_by_image), key=lambda k: str(k)
        )
        self.gt_lengths = []  # per image: array of longer sides
        self.ious = []  # per image: (n_det, n_gt) matrix, det rows in input order
        det_entries = []  # (-score, image_pos, det_pos) sort keys
        for pos, key in enumerate(self.image_keys):
            gts = [g for g in gts_by_image.get(key, ()) if g.label == label]
            dets = [d for d in dets_by_image.get(key, ()) if d.label == label]
            self.gt_lengths.append(np.array([g.box.length for g in gts]))
            if dets and gts:
                self.ious.append(rotated_iou_matrix([d.box for d in dets], [g.box for g in gts]))
            else:
                self.ious.append(np.zeros((len(dets), len(gts))))
            for det_pos, det in enumerate(dets):
                det_entries.append((-det.score, pos, det_pos))
        det_entries.sort()
        self.det_order = det_entries
        self.n_gts = int(sum(len(v) for v in self.gt_lengths))
        self.n_dets = len(det_entries)

    def tpfp(self, iou_threshold, bin_lo=None, bin_hi=None):
        """TP/FP flags over the global score order, skipping ignored dets.

        Returns (tp, fp, npos). When a bin is given, out-of-bin ground truths
        act as ignore regions.
        """
        if bin_lo is None:
            in_bin = [np.ones(len(v), dtype=bool) for v in self.gt_lengths]
        else:
            in_bin = [(bin_lo < v) & (v <= bin_hi) for v in self.gt_lengths]
        npos = int(sum(m.sum() for m in in_bin))
        taken = [np.zeros(len(v), dtype=bool) for v in self.gt_lengths]
        tp_flags = []
        fp_flags = []
        for _neg_score, img, det_pos in self.det_order:
            ious = self.ious[img][det_pos]
            best_gt = -1
            best_iou = 0.0
            for g in range(ious.shape[0]):
                if taken[img][g] or not in_bin[img][g]:
                    continue
                if ious[g] > best_iou:
                    best_iou = ious[g]
                    best_gt = g
            if best_gt >= 0 and best_iou >= iou_threshold:
                taken[img][best_gt] = True
                tp_flags.append(1.0)
                fp_flags.append(0.0)
                continue
            ignore = False
            if bin_lo is not None:
                for g in range(ious.shape[0]):
                    if not in_bin[img][g] and ious[g] >= iou_threshold:
                        ignore = True
                        break
            if not ignore:
                tp_flags.append(0.0)
                fp_flags.append(1.0)
        return np.array(tp_flags), np.array(fp_flags), npos


def _curve_ap(tp, fp, npos):
    """(AP, recalls, precisions, tp_total, fp_total); AP is None when npos=0."""
    if npos == 0:
        return None, np.zeros(0), np.zeros(0), 0, int(fp.sum())
    if tp.shape[0] == 0:
        return 0.0, np.zeros(0), np.zeros(0), 0, 0
    tp_cum = np.cumsum(tp)
    fp_cum = np.cumsum(fp)
    recalls = tp_cum / npos
    precisions = tp_cum / np.maximum(tp_cum + fp_cum, 1e-12)
    return voc07_ap(recalls, precisions), recalls, precisions, int(tp_cum[-1]), int(fp_cum[-1])


def _mean_or_none(values):
    present = [v for v in values if v is not None]
    if not present:
        return None
    return float(np.mean(present))


def evaluate(
    gts_by_image: Mapping,
    dets_by_image: Mapping,
    bins: LengthBins | None = None,
    iou_thresholds: Sequence[float] | None = None,
) -> EvalReport:
    """Dataset-level evaluation.

    ``gts_by_image`` maps image key -> GroundTruth sequence, ``dets_by_image``
    maps image key -> original-frame Detection sequence. Metrics are computed
    per class and averaged over classes that have ground truths.
    """
    if bins is None:
        bins = LengthBins.default()
    thresholds = tuple(iou_thresholds) if iou_thresholds is not None else map_sweep()
    if 0.5 not in thresholds:
        thresholds = (0.5, *thresholds)

    labels = sorted(
        {g.label for gts in gts_by_image.values() for g in gts}
        | {d.label for dets in dets_by_image.values() for d in dets}
    )
    class_data = {label: _ClassData(gts_by_image, dets_by_image, label) for label in labels}

    ap_by_iou = {}
    counts_50 = (0, 0, 0)
    pr50 = {}
    for thr in thresholds:
        class_aps = []
        tp_total = fp_total = npos_total = 0
        for label in labels:
            tp, fp, npos = class_data[label].tpfp(thr)
            ap, rec, prec, tp_n, fp_n = _curve_ap(tp, fp, npos)
            class_aps.append(ap)
            tp_total += tp_n
            fp_total += fp_n
            npos_total += npos
            if thr == 0.5:
                pr50[label] = (rec, prec)
        ap_by_iou[thr] = _mean_or_none(class_aps)
        if thr == 0.5:
            counts_50 = (tp_total, fp_total, npos_total - tp_total)

    bin_ap = {}
    bin_gt_counts = {}
    for name, lo, hi in bins.intervals:
        per_thr = []
        for thr in thresholds:
            class_aps = []
            for label in labels:
                tp, fp, npos = class_data[label].tpfp(thr, lo, hi)
                class_aps.append(_curve_ap(tp, fp, npos)[0])
            per_thr.append(_mean_or_none(class_aps))
        bin_ap[name] = _mean_or_none(per_thr)
        bin_gt_counts[name] = int(
            sum(
                ((lo < v) & (v <= hi)).sum()
                for label in labels
                for v in class_data[label].gt_lengths
            )
        )

    return EvalReport(
        ap_by_iou=ap_by_iou,
        ap50=ap_by_iou.get(0.5),
        ap75=ap_by_iou.get(0.75),
        map=_mean_or_none([ap_by_iou[t] for t in thresholds]),
        bin_ap=bin_ap,
        bin_gt_counts=bin_gt_counts,
        tp=counts_50[0],
        fp=counts_50[1],
        fn=counts_50[2],
        n_gts=int(sum(cd.n_gts for cd in class_data.values())),
        n_dets=int(sum(cd.n_dets for cd in class_data.values())),
        classes=tuple(labels),
        pr50=pr50,
    )


def _fmt(value) -> str:
    return "absent" if value is None else f"{value:.6f}"


def render_report(report: EvalReport) -> str:
    lines = [
        f"ground truths {report.n_gts}  detections {report.n_dets}  "
        f"classes {len(report.classes)}",
        f"counts at IoU 0.50: TP {report.tp}  FP {report.fp}  FN {report.fn}",
    ]
    for thr in sorted(report.ap_by_iou):
        lines.append(f"AP@{thr:.2f} {_fmt(report.ap_by_iou[thr])}")
    lines.append(f"AP50 {_fmt(report.ap50)}")
    lines.append(f"AP75 {_fmt(report.ap75)}")
    lines.append(f"mAP  {_fmt(report.map)}")
    for name, value in report.bin_ap.items():
        lines.append(
            f"AP[{name}] {_fmt(value)} (ground truths {report.bin_gt_counts[name]})"
        )
    return "\n".join(lines) + "\n"
