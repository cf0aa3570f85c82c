"""Scalar loss evaluators for a set predictor with an adjacency head.

These are pure evaluators (no gradients): weighted cross-entropy over
proposal classes, mean L1 and mean (1 - GIoU) over matched boxes,
element-wise binary cross-entropy over the matched adjacency, and
their weighted total. Box losses are means over matches; the
cross-entropy and adjacency losses are sums over their cells, which
matters when calibrating the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite
from typing import Sequence

import numpy as np

from unstack.boxes import BBox, giou
from unstack.matching import Matching

__all__ = [
    "LossWeights",
    "adjacency_loss",
    "box_losses",
    "classification_loss",
    "classification_targets",
    "total_loss",
]

_LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class LossWeights:
    """Weights of the total loss, plus the down-weight of the unknown class.

    The unknown/empty class dominates the proposal budget, so its
    cross-entropy contribution is scaled by unknown_class_weight,
    a value well below 1.
    """

    class_weight: float = 1.0
    l1_weight: float = 5.0
    giou_weight: float = 2.0
    adjacency_weight: float = 1.0
    unknown_class_weight: float = 0.1

    def __post_init__(self):
        for name in ("class_weight", "l1_weight", "giou_weight", "adjacency_weight"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0.0 < self.unknown_class_weight <= 1.0:
            raise ValueError("unknown_class_weight must be in (0, 1]")


def classification_targets(matching: Matching, gt_classes: Sequence[int],
                           num_proposals: int, unknown_index: int) -> np.ndarray:
    """Target class per proposal: its matched object's class, else unknown."""
    targets = np.full(num_proposals, unknown_index, dtype=int)
    for p, g in matching.pairs:
        targets[p] = int(gt_classes[g])
    return targets


def classification_loss(class_probs: np.ndarray, targets: Sequence[int],
                        unknown_class_weight: float = 0.1) -> float:
    """Weighted cross-entropy, summed over proposals.

    -sum_p w_p * log P_p(target_p), with w_p = 1 for real classes and
    unknown_class_weight for the unknown class (the last probability
    column). Log-probabilities are floored at log(1e-12).
    """
    probs = np.asarray(class_probs, dtype=float)
    targets = np.asarray(targets, dtype=int)
    if probs.ndim != 2 or targets.shape != (probs.shape[0],):
        raise ValueError(f"targets shape {targets.shape} does not match {probs.shape[0]} proposals")
    if (targets < 0).any() or (targets >= probs.shape[1]).any():
        raise ValueError("target class index out of range")
    unknown = probs.shape[1] - 1
    picked = probs[np.arange(probs.shape[0]), targets]
    logs = np.log(np.maximum(picked, _LOG_FLOOR))
    w = np.where(targets == unknown, unknown_class_weight, 1.0)
    return float(-(w * logs).sum())


def box_losses(pred_boxes: Sequence[BBox], gt_boxes: Sequence[BBox]) -> tuple[float, float]:
    """(mean L1 distance, mean 1 - GIoU) over matched box pairs.

    Both are 0 for an empty matching, by convention.
    """
    if len(pred_boxes) != len(gt_boxes):
        raise ValueError(f"{len(pred_boxes)} predicted boxes vs {len(gt_boxes)} ground-truth boxes")
    if not pred_boxes:
        return 0.0, 0.0
    l1 = float(np.mean([np.abs(p.as_array() - g.as_array()).sum()
                        for p, g in zip(pred_boxes, gt_boxes)]))
    giou_loss = float(np.mean([1.0 - giou(p, g) for p, g in zip(pred_boxes, gt_boxes)]))
    return l1, giou_loss


def adjacency_loss(predicted: np.ndarray, target: np.ndarray) -> float:
    """Binary cross-entropy between a predicted adjacency and its 0/1 target.

    Summed over off-diagonal cells only; both diagonals are
    structurally zero, so including them would only add a constant
    near-zero term. Predicted probabilities are clamped to
    [1e-12, 1 - 1e-12] before the logs.
    """
    predicted = np.asarray(predicted, dtype=float)
    target = np.asarray(target, dtype=float)
    if predicted.shape != target.shape or predicted.ndim != 2 \
            or predicted.shape[0] != predicted.shape[1]:
        raise ValueError(f"shape mismatch: predicted {predicted.shape} vs target {target.shape}")
    if not np.isin(target, (0.0, 1.0)).all():
        raise ValueError("target adjacency must be 0/1")
    off_diag = ~np.eye(predicted.shape[0], dtype=bool)
    p = np.clip(predicted[off_diag], _LOG_FLOOR, 1.0 - _LOG_FLOOR)
    t = target[off_diag]
    return float(-(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)).sum())


def total_loss(classification: float, l1: float, giou_loss: float, adjacency: float,
               weights: LossWeights = LossWeights()) -> float:
    """Weighted sum of the four loss components."""
    components = (classification, l1, giou_loss, adjacency)
    if not all(isfinite(c) for c in components):
        raise ValueError(f"loss components must be finite, got {components}")
    return (weights.class_weight * classification
            + weights.l1_weight * l1
            + weights.giou_weight * giou_loss
            + weights.adjacency_weight * adjacency)
