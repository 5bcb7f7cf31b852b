"""Detection scoring: IoU matching and per-class average precision at 0.5.

AP uses 101-point interpolation (precision envelope sampled at recalls
0.00, 0.01, ..., 1.00). Matching is greedy in descending score order with
ties broken by insertion order; each ground-truth box is claimed at most
once, so duplicate detections of the same object count as false positives.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from padx.core import BBox
from padx.dataset import Dataset, Instance
from padx.errors import DatasetError

logger = logging.getLogger(__name__)

RECALL_POINTS = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class Detection:
    image_id: int
    category_id: int
    bbox: BBox
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class CategoryEval:
    ap: float | None
    num_gt: int
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class EvalResult:
    per_category: dict[int, CategoryEval] = field(default_factory=dict)
    mean_ap: float = 0.0


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union; 0 for disjoint boxes."""
    ix = min(a.x2, b.x2) - max(a.x, b.x)
    iy = min(a.y2, b.y2) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def match_detections(dets: list[Detection], gts: list[Instance],
                     thresh: float = 0.5) -> np.ndarray:
    """Greedy one-to-one matching; returns TP flags aligned with the input list.

    Detections are processed in descending score (ties by insertion order);
    each claims the unmatched ground truth with the highest IoU >= thresh.
    """
    labels = np.zeros(len(dets), dtype=bool)
    claimed = [False] * len(gts)
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    for i in order:
        best_iou = 0.0
        best_j = -1
        for j, gt in enumerate(gts):
            if claimed[j]:
                continue
            overlap = iou(dets[i].bbox, gt.bbox)
            if overlap >= thresh and overlap > best_iou:
                best_iou = overlap
                best_j = j
        if best_j >= 0:
            claimed[best_j] = True
            labels[i] = True
    return labels


def average_precision(tp_flags, num_gt: int) -> float | None:
    """101-point interpolated AP from score-ordered TP/FP flags.

    Returns None (undefined, excluded from means) when there is nothing to
    measure: no ground truth and no detections. Detections against an empty
    ground truth score 0.
    """
    if num_gt < 0:
        raise ValueError(f"num_gt must be >= 0, got {num_gt}")
    tp_flags = np.asarray(tp_flags, dtype=bool)
    if num_gt == 0:
        return None if tp_flags.size == 0 else 0.0
    if tp_flags.size == 0:
        return 0.0
    tp_cum = np.cumsum(tp_flags)
    fp_cum = np.cumsum(~tp_flags)
    recall = tp_cum / num_gt
    precision = tp_cum / (tp_cum + fp_cum)
    # Envelope: best precision achievable at recall >= r.
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    total = 0.0
    for r in RECALL_POINTS:
        idx = np.searchsorted(recall, r, side="left")
        total += envelope[idx] if idx < envelope.size else 0.0
    return total / RECALL_POINTS.size


def evaluate(dets: list[Detection], ds: Dataset, thresh: float = 0.5) -> EvalResult:
    """Per-category AP50 pooled over images; mean over categories with truth."""
    cat_ids = {c.id for c in ds.categories}
    for det in dets:
        if det.category_id not in cat_ids:
            raise DatasetError(f"detection references unknown category id {det.category_id}")

    gt_by_cat_img: dict[tuple[int, int], list[Instance]] = {}
    gt_count: dict[int, int] = {cid: 0 for cid in cat_ids}
    for ann in ds.annotations:
        gt_by_cat_img.setdefault((ann.category_id, ann.image_id), []).append(ann)
        gt_count[ann.category_id] += 1

    det_by_cat_img: dict[tuple[int, int], list[Detection]] = {}
    for det in dets:
        det_by_cat_img.setdefault((det.category_id, det.image_id), []).append(det)

    per_category: dict[int, CategoryEval] = {}
    ap_values = []
    for cid in sorted(cat_ids):
        # Pool per-image matches, then order globally by score for the PR curve.
        pooled: list[tuple[float, int, bool]] = []
        insertion = 0
        for (c, img_id), group in sorted(det_by_cat_img.items(),
                                         key=lambda kv: (kv[0][0], kv[0][1])):
            if c != cid:
                continue
            labels = match_detections(group, gt_by_cat_img.get((c, img_id), []), thresh)
            for det, tp in zip(group, labels):
                pooled.append((det.score, insertion, bool(tp)))
                insertion += 1
        pooled.sort(key=lambda t: (-t[0], t[1]))
        flags = [tp for _, _, tp in pooled]
        ap = average_precision(flags, gt_count[cid])
        tp_total = sum(flags)
        eval_entry = CategoryEval(
            ap=ap, num_gt=gt_count[cid], tp=tp_total,
            fp=len(flags) - tp_total, fn=gt_count[cid] - tp_total,
        )
        per_category[cid] = eval_entry
        if gt_count[cid] > 0:
            ap_values.append(ap if ap is not None else 0.0)

    mean_ap = float(np.mean(ap_values)) if ap_values else 0.0
    return EvalResult(per_category=per_category, mean_ap=mean_ap)
