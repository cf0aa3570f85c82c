"""Assignment of predicted detections to ground-truth objects.

A set predictor emits a fixed budget of q proposals per image; the m
annotated objects (m <= q) must each be paired with one distinct
proposal before any loss can be evaluated. Pairing minimizes a
weighted sum of a classification term, an L1 box term, and a GIoU box
term over the bipartite assignment, solved exactly with
scipy's linear_sum_assignment. The same index bookkeeping extracts the
matched submatrix of a q x q predicted adjacency, reordered to follow
the ground-truth numbering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from unstack.adjacency import AdjacencyMatrix, CycleError, extract_order
from unstack.boxes import BBox, giou, iou

__all__ = [
    "GroundTruth",
    "MatchWeights",
    "Matching",
    "Prediction",
    "hungarian",
    "match_cost",
    "matched_adjacency",
]


@dataclass(frozen=True)
class MatchWeights:
    """Relative weights of the matching-cost terms (defaults follow common set-prediction practice)."""

    class_weight: float = 1.0
    l1_weight: float = 5.0
    giou_weight: float = 2.0

    def __post_init__(self):
        for name in ("class_weight", "l1_weight", "giou_weight"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class Matching:
    """Result of a bipartite assignment.

    `pairs` holds (prediction index, ground-truth index) tuples sorted
    by ground-truth index, one per ground truth; `unmatched` lists the
    leftover prediction indices in increasing order.
    """

    pairs: tuple[tuple[int, int], ...]
    unmatched: tuple[int, ...]

    def __post_init__(self):
        pairs = tuple(sorted(((int(p), int(g)) for p, g in self.pairs), key=lambda pg: pg[1]))
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "unmatched", tuple(int(p) for p in sorted(self.unmatched)))
        preds = [p for p, _ in pairs]
        gts = [g for _, g in pairs]
        if len(set(gts)) != len(gts):
            raise ValueError("a ground-truth index appears in more than one pair")
        used = preds + list(self.unmatched)
        if len(set(used)) != len(used):
            raise ValueError("a prediction index is used more than once")

    def prediction_order(self) -> tuple[int, ...]:
        """Matched prediction indices, ordered by ground-truth index."""
        return tuple(p for p, _ in self.pairs)

    def prediction_for(self, gt_index: int) -> int:
        for p, g in self.pairs:
            if g == gt_index:
                return p
        raise KeyError(f"ground truth {gt_index} is not matched")


@dataclass(frozen=True, eq=False)
class Prediction:
    """One image's raw set-predictor output.

    class_probs has one row per proposal over the real classes plus a
    trailing "unknown/empty" column; rows must sum to 1 within 1e-6.
    adjacency is the raw q x q edge-probability matrix over proposals.
    """

    boxes: tuple[BBox, ...]
    class_probs: np.ndarray
    adjacency: np.ndarray

    def __post_init__(self):
        boxes = tuple(self.boxes)
        probs = np.array(self.class_probs, dtype=float)
        adj = np.array(self.adjacency, dtype=float)
        q = len(boxes)
        if probs.ndim != 2 or probs.shape[0] != q or probs.shape[1] < 2:
            raise ValueError(f"class_probs shape {probs.shape} inconsistent with {q} boxes")
        if (probs < 0.0).any():
            raise ValueError("class probabilities must be nonnegative")
        if not np.allclose(probs.sum(axis=1), 1.0, rtol=0.0, atol=1e-6):
            raise ValueError("class probability rows must sum to 1")
        AdjacencyMatrix(adj)  # reuse the range/diagonal/squareness checks
        if adj.shape[0] != q:
            raise ValueError(f"adjacency shape {adj.shape} inconsistent with {q} boxes")
        probs.setflags(write=False)
        adj.setflags(write=False)
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "class_probs", probs)
        object.__setattr__(self, "adjacency", adj)

    @property
    def q(self) -> int:
        return len(self.boxes)

    @property
    def num_real_classes(self) -> int:
        return self.class_probs.shape[1] - 1

    @property
    def unknown_index(self) -> int:
        return self.class_probs.shape[1] - 1


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Annotated objects of one image: boxes, class indices, and the 0/1 support DAG."""

    boxes: tuple[BBox, ...]
    classes: tuple[int, ...]
    adjacency: np.ndarray

    def __post_init__(self):
        boxes = tuple(self.boxes)
        classes = tuple(int(c) for c in self.classes)
        adj = np.array(self.adjacency, dtype=float)
        m = len(boxes)
        if len(classes) != m:
            raise ValueError(f"{len(classes)} classes for {m} boxes")
        if not np.isin(adj, (0.0, 1.0)).all():
            raise ValueError("ground-truth adjacency must be 0/1")
        AdjacencyMatrix(adj)
        if adj.shape[0] != m:
            raise ValueError(f"adjacency shape {adj.shape} inconsistent with {m} boxes")
        try:
            extract_order(AdjacencyMatrix(adj), 0.5)
        except CycleError as err:
            raise ValueError(f"ground-truth stacking graph is cyclic: {err}") from err
        adj.setflags(write=False)
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "adjacency", adj)

    @property
    def m(self) -> int:
        return len(self.boxes)

    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((int(i), int(j)) for i, j in np.argwhere(self.adjacency == 1.0))


def hungarian(cost: np.ndarray) -> Matching:
    """Minimum-cost assignment of every column (ground truth) to a distinct row (prediction).

    `cost` is q x m with q >= m and finite entries. The optimum is
    exact, not greedy, and the call is deterministic: identical input
    always yields the identical Matching.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError("cost must be a 2-d matrix")
    q, m = cost.shape
    if q < m:
        raise ValueError(f"need at least as many predictions as ground truths, got {q} < {m}")
    if m and not np.isfinite(cost).all():
        raise ValueError("cost entries must be finite")
    rows, cols = linear_sum_assignment(cost)
    pairs = tuple(zip((int(r) for r in rows), (int(c) for c in cols)))
    matched = {int(r) for r in rows}
    unmatched = tuple(p for p in range(q) if p not in matched)
    return Matching(pairs=pairs, unmatched=unmatched)


def match_cost(pred: Prediction, gt: GroundTruth,
               weights: MatchWeights = MatchWeights()) -> np.ndarray:
    """q x m matching-cost matrix between proposals and annotated objects.

    cost[p, g] = class_weight * (1 - P_p(class_g))
               + l1_weight * |box_p - box_g|_1  (center-size coordinates)
               + giou_weight * (1 - GIoU(box_p, box_g))
    """
    for g, cls in enumerate(gt.classes):
        if not 0 <= cls < pred.num_real_classes:
            raise ValueError(f"ground-truth class {cls} (object {g}) outside the predictor's real classes")
    pred_arrays = [b.as_array() for b in pred.boxes]
    gt_arrays = [b.as_array() for b in gt.boxes]
    cost = np.zeros((pred.q, gt.m))
    for g in range(gt.m):
        for p in range(pred.q):
            class_term = 1.0 - pred.class_probs[p, gt.classes[g]]
            l1_term = float(np.abs(pred_arrays[p] - gt_arrays[g]).sum())
            giou_term = 1.0 - giou(pred.boxes[p], gt.boxes[g])
            cost[p, g] = (weights.class_weight * class_term
                          + weights.l1_weight * l1_term
                          + weights.giou_weight * giou_term)
    return cost


def matched_adjacency(adjacency: np.ndarray, matching: Matching) -> np.ndarray:
    """Submatrix of a predicted adjacency restricted to matched proposals.

    Rows and columns are reordered to follow the ground-truth
    numbering, so entry (a, b) of the result talks about ground-truth
    objects a and b.
    """
    adjacency = np.asarray(adjacency, dtype=float)
    if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
        raise ValueError("adjacency must be square")
    order = matching.prediction_order()
    for p in order:
        if not 0 <= p < adjacency.shape[0]:
            raise ValueError(f"matched prediction index {p} outside the {adjacency.shape[0]}-proposal matrix")
    idx = np.array(order, dtype=int)
    return adjacency[np.ix_(idx, idx)]


def pairwise_iou(a: Sequence[BBox], b: Sequence[BBox]) -> np.ndarray:
    """len(a) x len(b) IoU table (helper for metric box matching)."""
    table = np.zeros((len(a), len(b)))
    for i, box_a in enumerate(a):
        for j, box_b in enumerate(b):
            table[i, j] = iou(box_a, box_b)
    return table
