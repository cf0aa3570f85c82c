"""Noisy per-view observation model: detections, adjacency, grasp quality.

Stands in for a perception stack. Each view detects every present
object independently, reports an edge-probability matrix over the
detected set (true edges drawn near 1, absent edges near 0, with
optional occlusion collapsing a true edge to an uninformative 0.5),
and scores per-object grasp quality, penalized for objects that have
detected objects sitting on them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from unstack.adjacency import AdjacencyMatrix, max_entropy

__all__ = ["ObservationModel", "ViewObservation", "Viewpoint",
           "info_gain_scores", "observe"]

# Noisy draws are kept strictly inside (0, 1) so a finite sample can
# never fabricate the hard certainty reserved for degenerate models.
_DRAW_CLAMP = 1e-6


@dataclass(frozen=True)
class Viewpoint:
    vid: int
    quality: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.quality <= 1.0:
            raise ValueError(f"viewpoint quality must be in (0, 1], got {self.quality}")


@dataclass(frozen=True)
class ObservationModel:
    """Parameters of the per-view noise.

    True edges are drawn from Beta(edge_alpha, edge_beta) and absent
    edges from Beta(edge_beta, edge_alpha); edge_beta = 0 makes both
    degenerate (exact 1 and 0). A true edge is occluded with
    probability p_occlude and then reads 0.5. view_noise_scale shrinks
    draws toward 0.5 on low-quality viewpoints by the factor
    1 - view_noise_scale * (1 - quality). Grasp quality is a
    Beta(quality_alpha, quality_beta) draw scaled by
    support_penalty per detected object resting on the candidate.
    misassociation_rate is the per-view chance that two detected ids
    are transposed, corrupting the cross-view bookkeeping.
    """

    p_detect: float = 1.0
    edge_alpha: float = 9.0
    edge_beta: float = 1.0
    p_occlude: float = 0.1
    view_noise_scale: float = 0.0
    quality_alpha: float = 4.0
    quality_beta: float = 2.0
    support_penalty: float = 0.6
    misassociation_rate: float = 0.0

    def __post_init__(self):
        for name in ("p_detect", "p_occlude", "view_noise_scale", "misassociation_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        for name in ("edge_alpha", "quality_alpha"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("edge_beta", "quality_beta"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        if not 0.0 < self.support_penalty <= 1.0:
            raise ValueError("support_penalty must be in (0, 1]")

    @classmethod
    def noiseless(cls) -> "ObservationModel":
        """Degenerate model: observations equal the ground truth exactly."""
        return cls(p_detect=1.0, edge_alpha=1.0, edge_beta=0.0, p_occlude=0.0,
                   view_noise_scale=0.0, quality_alpha=1.0, quality_beta=0.0,
                   support_penalty=0.5, misassociation_rate=0.0)


@dataclass(frozen=True, eq=False)
class ViewObservation:
    """What one view reports: detected ids, edge beliefs, grasp qualities."""

    viewpoint: int
    object_ids: tuple[int, ...]
    adjacency: AdjacencyMatrix
    grasp_quality: np.ndarray

    def __post_init__(self):
        ids = tuple(int(i) for i in self.object_ids)
        quality = np.array(self.grasp_quality, dtype=float)
        if self.adjacency.n != len(ids):
            raise ValueError(f"adjacency covers {self.adjacency.n} objects, got {len(ids)} ids")
        if quality.shape != (len(ids),):
            raise ValueError("one grasp-quality score per detected object required")
        if quality.size and ((quality < 0.0).any() or (quality > 1.0).any()):
            raise ValueError("grasp quality must lie in [0, 1]")
        quality.setflags(write=False)
        object.__setattr__(self, "object_ids", ids)
        object.__setattr__(self, "grasp_quality", quality)


def observe(scene, viewpoint: Viewpoint, model: ObservationModel, rng) -> ViewObservation:
    """Simulate one view of the scene from the given viewpoint."""
    rng = np.random.default_rng(rng)
    present = scene.present_ids()
    detected = [oid for oid in present if rng.random() < model.p_detect]
    m = len(detected)
    truth = scene.true_adjacency(tuple(detected))

    if model.edge_beta == 0.0:
        observed = truth.copy()
    else:
        true_draws = rng.beta(model.edge_alpha, model.edge_beta, size=(m, m))
        absent_draws = rng.beta(model.edge_beta, model.edge_alpha, size=(m, m))
        observed = np.where(truth == 1.0, true_draws, absent_draws)
    if model.p_occlude > 0.0 and m:
        occluded = rng.random(size=(m, m)) < model.p_occlude
        observed = np.where((truth == 1.0) & occluded, 0.5, observed)
    shrink = max(0.0, 1.0 - model.view_noise_scale * (1.0 - viewpoint.quality))
    observed = 0.5 + (observed - 0.5) * shrink
    if model.edge_beta != 0.0:
        observed = np.clip(observed, _DRAW_CLAMP, 1.0 - _DRAW_CLAMP)
    np.fill_diagonal(observed, 0.0)

    if model.quality_beta == 0.0:
        base_quality = np.ones(m)
    else:
        base_quality = rng.beta(model.quality_alpha, model.quality_beta, size=m)
    detected_set = set(detected)
    n_above = np.array([len(scene.objects_on(oid) & detected_set) for oid in detected])
    quality = base_quality * model.support_penalty ** n_above

    if model.misassociation_rate > 0.0 and m >= 2:
        if rng.random() < model.misassociation_rate:
            a, b = rng.choice(m, size=2, replace=False)
            detected[a], detected[b] = detected[b], detected[a]

    return ViewObservation(viewpoint=viewpoint.vid,
                           object_ids=tuple(detected),
                           adjacency=AdjacencyMatrix(observed),
                           grasp_quality=quality)


def info_gain_scores(belief: AdjacencyMatrix, viewpoints, visited=frozenset(),
                     novelty_discount: float = 0.25) -> np.ndarray:
    """Expected value of taking each candidate viewpoint next.

    A surrogate for a dedicated next-best-view planner: the current
    entropy statistic scaled by viewpoint quality, with already visited
    viewpoints discounted. Scores are nonnegative, bounded by the
    current entropy, and all zero once the hierarchy is certain.
    """
    viewpoints = list(viewpoints)
    if not viewpoints:
        raise ValueError("no viewpoints available")
    if all(vp.vid in visited for vp in viewpoints):
        raise ValueError("no unvisited viewpoint available")
    h = max_entropy(belief)
    return np.array([h * vp.quality * (1.0 if vp.vid not in visited else novelty_discount)
                     for vp in viewpoints])
