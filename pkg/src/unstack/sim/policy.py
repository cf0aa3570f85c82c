"""Grasp-or-look decision policies.

The entropy-gated policy grasps only while the stacking hierarchy is
sufficiently certain: if the maximum binary entropy of the safe-grasp
probabilities is at or below the threshold it grasps the
highest-quality object among those believed clear, otherwise it asks
for the most informative unvisited viewpoint. The baseline ignores the
hierarchy entirely and always grasps the highest-quality object.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from unstack.adjacency import AdjacencyMatrix, max_entropy, safe_grasp_probs
from unstack.sim.observe import Viewpoint, info_gain_scores

__all__ = ["PolicyAction", "PolicyParams", "PolicyStuckError",
           "baseline_step", "entropy_gated_step"]


class PolicyStuckError(RuntimeError):
    """No grasp target and no viewpoint left: the episode is in a failure state."""


@dataclass(frozen=True)
class PolicyAction:
    kind: str  # "grasp" or "view"
    target: int

    def __post_init__(self):
        if self.kind not in ("grasp", "view"):
            raise ValueError(f"unknown action kind {self.kind!r}")

    @classmethod
    def grasp(cls, oid: int) -> "PolicyAction":
        return cls("grasp", int(oid))

    @classmethod
    def view(cls, vid: int) -> "PolicyAction":
        return cls("view", int(vid))


@dataclass(frozen=True)
class PolicyParams:
    """Operating point of the entropy-gated policy.

    entropy_threshold is in nats; 0.45 sits below ln 2 so a single
    fifty-fifty object forces another view. safety_threshold is the
    minimum believed safe-grasp probability for a grasp candidate, and
    quality_threshold the minimum grasp quality.
    """

    entropy_threshold: float = 0.45
    quality_threshold: float = 0.0
    safety_threshold: float = 0.5

    def __post_init__(self):
        if self.entropy_threshold < 0.0:
            raise ValueError("entropy_threshold must be nonnegative")
        for name in ("quality_threshold", "safety_threshold"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")


def _best_by_quality(object_ids: Sequence[int], qualities: np.ndarray,
                     pool: Sequence[int]) -> int:
    """Highest quality wins; ties go to the lowest object id."""
    best = max(pool, key=lambda k: (qualities[k], -object_ids[k]))
    return int(object_ids[best])


def entropy_gated_step(belief: AdjacencyMatrix, object_ids: Sequence[int],
                       qualities: np.ndarray, viewpoints: Sequence[Viewpoint],
                       visited: frozenset | set = frozenset(),
                       params: PolicyParams = PolicyParams()) -> PolicyAction:
    """One decision of the entropy-gated policy.

    Grasps when the entropy statistic is at or below the threshold (or
    when no unvisited viewpoint remains), choosing the highest-quality
    object among those with believed safe-grasp probability at or above
    the safety threshold and quality at or above the quality threshold;
    if no object qualifies, falls back to the global quality argmax.
    Otherwise requests the viewpoint with the best information-gain
    score. Raises PolicyStuckError when it can neither grasp nor view.
    """
    object_ids = list(object_ids)
    unvisited = [vp for vp in viewpoints if vp.vid not in visited]
    if not object_ids:
        if not unvisited:
            raise PolicyStuckError("nothing detected and no viewpoint left to try")
        best = max(unvisited, key=lambda vp: (vp.quality, -vp.vid))
        return PolicyAction.view(best.vid)
    if belief.n != len(object_ids):
        raise ValueError(f"belief covers {belief.n} objects, got {len(object_ids)} ids")
    qualities = np.asarray(qualities, dtype=float)

    if max_entropy(belief) <= params.entropy_threshold or not unvisited:
        safe = safe_grasp_probs(belief).probs
        candidates = [k for k in range(len(object_ids))
                      if safe[k] >= params.safety_threshold
                      and qualities[k] >= params.quality_threshold]
        pool = candidates if candidates else range(len(object_ids))
        return PolicyAction.grasp(_best_by_quality(object_ids, qualities, pool))

    scores = info_gain_scores(belief, unvisited, visited)
    return PolicyAction.view(unvisited[int(np.argmax(scores))].vid)


def baseline_step(object_ids: Sequence[int], qualities: np.ndarray) -> PolicyAction:
    """Quality-only baseline: grasp the best-scoring detected object."""
    object_ids = list(object_ids)
    if not object_ids:
        raise PolicyStuckError("nothing detected")
    qualities = np.asarray(qualities, dtype=float)
    return PolicyAction.grasp(_best_by_quality(object_ids, qualities, range(len(object_ids))))
