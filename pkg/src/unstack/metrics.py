"""Relationship-inference quality metrics over an evaluation set.

An ordered pair (i, j) of final detections counts as a *detected
relationship* when its edge probability is above 0.5 and beats the
reverse direction. Predicted boxes are paired to ground-truth boxes by
minimum-cost assignment on (1 - IoU), discarding pairs under the IoU
threshold; a detected relationship is a true positive when both
endpoints are matched with correct classes and the corresponding
ground-truth edge exists.

Reported figures:

* object precision: true positives / all detected relationships,
* object recall: true positives / all ground-truth relationships,
* image accuracy: fraction of images with every object detected and
  classified correctly and a perfect relationship set (no false
  positives, no misses),
* image accuracy grouped by the number of annotated objects.

All figures are percentages. Per-image scoring is independent, so the
evaluation parallelizes trivially; aggregation is just summed counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from unstack.matching import GroundTruth, Prediction, pairwise_iou

__all__ = ["MetricsReport", "detected_relationships", "relationship_metrics"]


@dataclass(frozen=True)
class MetricsReport:
    object_precision: float
    object_recall: float
    image_accuracy: float
    ia_by_count: Mapping[int, float] = field(default_factory=dict)
    image_counts: Mapping[int, int] = field(default_factory=dict)
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    images: int = 0

    def __post_init__(self):
        for name in ("object_precision", "object_recall", "image_accuracy"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise ValueError(f"{name}={value} outside [0, 100]")

    def as_dict(self) -> dict:
        return {
            "object_precision": self.object_precision,
            "object_recall": self.object_recall,
            "image_accuracy": self.image_accuracy,
            "ia_by_count": {str(k): v for k, v in sorted(self.ia_by_count.items())},
            "image_counts": {str(k): v for k, v in sorted(self.image_counts.items())},
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "images": self.images,
        }


def detected_relationships(adjacency: np.ndarray) -> tuple[tuple[int, int], ...]:
    """Ordered pairs whose edge probability exceeds 0.5 and the reverse direction."""
    adjacency = np.asarray(adjacency, dtype=float)
    hits = (adjacency > 0.5) & (adjacency > adjacency.T)
    return tuple((int(i), int(j)) for i, j in np.argwhere(hits))


def _match_boxes(pred: Prediction, gt: GroundTruth, iou_threshold: float) -> dict[int, int]:
    """Prediction index -> ground-truth index, by assignment on (1 - IoU)."""
    if not pred.boxes or not gt.boxes:
        return {}
    overlap = pairwise_iou(pred.boxes, gt.boxes)
    rows, cols = linear_sum_assignment(1.0 - overlap)
    return {int(p): int(g) for p, g in zip(rows, cols) if overlap[p, g] >= iou_threshold}


def relationship_metrics(predictions: Sequence[Prediction],
                         ground_truths: Sequence[GroundTruth],
                         iou_threshold: float = 0.5,
                         *,
                         binary: bool = False,
                         count_unmatched_fp: bool = True) -> MetricsReport:
    """Score per-image predictions against their annotations.

    In binary mode class correctness reduces to the box match alone.
    When count_unmatched_fp is set (default), detected relationships
    incident to an unmatched predicted box count as false positives;
    otherwise they are dropped from the detected set.
    """
    if len(predictions) != len(ground_truths):
        raise ValueError(f"{len(predictions)} predictions vs {len(ground_truths)} ground truths")

    tp_total = fp_total = fn_total = 0
    flags_by_count: dict[int, list[bool]] = {}

    for pred, gt in zip(predictions, ground_truths):
        box_match = _match_boxes(pred, gt, iou_threshold)
        if binary:
            class_ok = dict.fromkeys(box_match, True)
        else:
            predicted_class = np.argmax(pred.class_probs[:, :-1], axis=1) if pred.boxes else np.zeros(0, int)
            class_ok = {p: int(predicted_class[p]) == gt.classes[g] for p, g in box_match.items()}

        gt_edges = set(gt.edges())
        tp_edges: set[tuple[int, int]] = set()
        fp = 0
        for i, j in detected_relationships(pred.adjacency):
            if i not in box_match or j not in box_match:
                if count_unmatched_fp:
                    fp += 1
                continue
            mapped = (box_match[i], box_match[j])
            if class_ok[i] and class_ok[j] and mapped in gt_edges:
                tp_edges.add(mapped)
            else:
                fp += 1
        tp = len(tp_edges)
        fn = len(gt_edges) - tp

        matched_gts = set(box_match.values())
        objects_ok = all(g in matched_gts for g in range(gt.m)) and all(class_ok.get(p, False)
                                                                        for p in box_match)
        perfect = fp == 0 and fn == 0 and objects_ok

        tp_total += tp
        fp_total += fp
        fn_total += fn
        flags_by_count.setdefault(gt.m, []).append(perfect)

    detected_total = tp_total + fp_total
    gt_total = tp_total + fn_total
    precision = 100.0 * tp_total / detected_total if detected_total else 100.0
    recall = 100.0 * tp_total / gt_total if gt_total else 100.0
    ia_by_count = {m: 100.0 * float(np.mean(flags)) for m, flags in flags_by_count.items()}
    image_counts = {m: len(flags) for m, flags in flags_by_count.items()}
    all_flags = [flag for flags in flags_by_count.values() for flag in flags]
    accuracy = 100.0 * float(np.mean(all_flags)) if all_flags else 100.0
    return MetricsReport(
        object_precision=precision,
        object_recall=recall,
        image_accuracy=accuracy,
        ia_by_count=ia_by_count,
        image_counts=image_counts,
        true_positives=tp_total,
        false_positives=fp_total,
        false_negatives=fn_total,
        images=len(predictions),
    )
