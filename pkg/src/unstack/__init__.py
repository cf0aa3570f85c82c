"""Probabilistic stacking-hierarchy inference and grasp-order decision tools.

The package has four layers:

* `unstack.adjacency`: the edge-probability matrix calculus (moments,
  safe-grasp probabilities, Bayesian multi-view fusion, entropy,
  topological layering),
* `unstack.boxes`, `unstack.matching`, `unstack.losses`,
  `unstack.metrics`: detection geometry, optimal assignment, loss
  evaluators, and relationship metrics,
* `unstack.sim`: a seeded bin-clearing simulator comparing an
  entropy-gated grasp policy against a quality-only baseline,
* `unstack.io` and `unstack.cli`: file schemas and the command-line
  front end.
"""

from unstack.adjacency import (AdjacencyMatrix, CycleError, EdgeProbability,
                               FusionConflictError, SafeGraspVector,
                               extract_order, from_edges, fuse, max_entropy,
                               moment, safe_grasp_probs, support_counts)
from unstack.boxes import BBox, giou, iou
from unstack.losses import (LossWeights, adjacency_loss, box_losses,
                            classification_loss, classification_targets,
                            total_loss)
from unstack.matching import (GroundTruth, Matching, MatchWeights, Prediction,
                              hungarian, match_cost, matched_adjacency)
from unstack.metrics import MetricsReport, detected_relationships, relationship_metrics

__version__ = "0.1.0"

__all__ = [
    "AdjacencyMatrix", "BBox", "CycleError", "EdgeProbability",
    "FusionConflictError", "GroundTruth", "LossWeights", "MatchWeights",
    "Matching", "MetricsReport", "Prediction", "SafeGraspVector",
    "adjacency_loss", "box_losses", "classification_loss",
    "classification_targets", "detected_relationships", "extract_order",
    "from_edges", "fuse", "giou", "hungarian", "iou", "match_cost",
    "matched_adjacency", "max_entropy", "moment", "relationship_metrics",
    "safe_grasp_probs", "support_counts", "total_loss",
]
