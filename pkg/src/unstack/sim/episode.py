"""Bin-clearing episodes: grasp outcomes and the observe/decide/act loop.

Each grasp cycle starts with a fresh home-view observation (the world
may have changed since the last grasp). The entropy-gated policy may
insert extra views, fusing each new observation into the cycle's
belief, before committing to a grasp; the baseline grasps immediately.
The episode ends when the bin is empty or after a run of consecutive
grasp failures.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from unstack.adjacency import AdjacencyMatrix, FusionConflictError, fuse, max_entropy
from unstack.sim.observe import ObservationModel, ViewObservation, Viewpoint, observe
from unstack.sim.policy import (PolicyAction, PolicyParams, PolicyStuckError,
                                baseline_step, entropy_gated_step)
from unstack.sim.scene import SceneGraph

__all__ = ["EpisodeReport", "GraspOutcome", "GraspOutcomeModel", "StepRecord",
           "POLICIES", "apply_grasp", "run_episode"]

POLICIES = ("entropy_gated", "quality_baseline")


@dataclass(frozen=True)
class GraspOutcomeModel:
    """Grasp success odds and what happens to the objects left behind.

    Grasping an object that still supports others is an order error:
    its success probability drops by order_error_penalty, and on
    success each object it supported topples free (loses all its
    supports) with probability topple_prob. double_grasp_prob is the
    chance that a successful grasp also lifts one object resting on the
    target; off by default.
    """

    base_success: float = 0.9
    order_error_penalty: float = 0.4
    topple_prob: float = 0.5
    double_grasp_prob: float = 0.0

    def __post_init__(self):
        for name in ("base_success", "order_error_penalty", "topple_prob", "double_grasp_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")

    @classmethod
    def deterministic(cls) -> "GraspOutcomeModel":
        return cls(base_success=1.0, order_error_penalty=0.0,
                   topple_prob=0.0, double_grasp_prob=0.0)


@dataclass(frozen=True)
class GraspOutcome:
    success: bool
    order_error: bool
    toppled: tuple[int, ...] = ()
    removed: tuple[int, ...] = ()


@dataclass(frozen=True)
class StepRecord:
    action: str
    target: int
    entropy: float | None = None
    success: bool | None = None
    order_error: bool | None = None
    toppled: tuple[int, ...] = ()
    removed: tuple[int, ...] = ()
    detected: tuple[int, ...] = ()
    fusion_conflict: bool = False


@dataclass(frozen=True)
class EpisodeReport:
    policy: str
    grasp_attempts: int
    grasp_successes: int
    views_added: int
    order_errors: int
    cleared: bool
    failed: bool
    steps: tuple[StepRecord, ...] = ()

    def __post_init__(self):
        if self.grasp_successes > self.grasp_attempts:
            raise ValueError("successes cannot exceed attempts")
        if self.order_errors > self.grasp_attempts:
            raise ValueError("order errors cannot exceed attempts")

    def to_dict(self) -> dict:
        data = asdict(self)
        data["steps"] = [asdict(s) for s in self.steps]
        return data


def apply_grasp(scene: SceneGraph, oid: int, rng,
                model: GraspOutcomeModel = GraspOutcomeModel()) -> GraspOutcome:
    """Attempt to grasp `oid`, mutating the scene on success.

    Grasping an object that still directly supports another is flagged
    as an order error whether or not the grasp succeeds.
    """
    if not scene.is_present(oid):
        raise ValueError(f"object {oid} is not present")
    rng = np.random.default_rng(rng)
    supported = sorted(scene.objects_on(oid))
    order_error = bool(supported)
    p_success = model.base_success - (model.order_error_penalty if order_error else 0.0)
    success = bool(rng.random() < max(0.0, p_success))
    if not success:
        return GraspOutcome(success=False, order_error=order_error)

    scene.remove(oid)
    removed = [oid]
    toppled = []
    for s in supported:
        if rng.random() < model.topple_prob:
            scene.drop_supports(s)
            toppled.append(s)
    if model.double_grasp_prob > 0.0 and supported:
        if rng.random() < model.double_grasp_prob:
            extra = supported[0]
            if scene.is_present(extra):
                scene.remove(extra)
                removed.append(extra)
    return GraspOutcome(success=True, order_error=order_error,
                        toppled=tuple(toppled), removed=tuple(removed))


def _merge_observation(belief: np.ndarray, obs: ViewObservation,
                       index: dict[int, int], known: set[int],
                       qualities: dict[int, float]) -> tuple[np.ndarray, bool]:
    """Fuse one view into the cycle belief; on a hard conflict keep the prior."""
    if not obs.object_ids:
        return belief, False
    rows = [index[oid] for oid in obs.object_ids]
    embedded = np.full_like(belief, 0.5)
    np.fill_diagonal(embedded, 0.0)
    embedded[np.ix_(rows, rows)] = obs.adjacency.entries
    try:
        fused = fuse([AdjacencyMatrix(belief), AdjacencyMatrix(embedded)]).entries.copy()
    except FusionConflictError:
        return belief, True
    known.update(obs.object_ids)
    for oid, q in zip(obs.object_ids, obs.grasp_quality):
        qualities[oid] = float(q)
    return fused, False


def run_episode(scene: SceneGraph, policy: str, observation: ObservationModel,
                outcome: GraspOutcomeModel, viewpoints: Sequence[Viewpoint], rng,
                *, params: PolicyParams = PolicyParams(),
                failure_limit: int = 10) -> EpisodeReport:
    """Run one policy on one scene until cleared or failed.

    Identical (scene, configuration, rng seed) inputs reproduce the
    identical report, step log included.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}, expected one of {POLICIES}")
    if not viewpoints:
        raise ValueError("at least one viewpoint is required")
    if failure_limit < 1:
        raise ValueError("failure_limit must be at least 1")
    rng = np.random.default_rng(rng)

    steps: list[StepRecord] = []
    attempts = successes = views = order_errors = 0
    consecutive_failures = 0
    failed = False

    while scene.present_ids() and consecutive_failures < failure_limit:
        ids = scene.present_ids()
        index = {oid: k for k, oid in enumerate(ids)}
        belief = np.full((len(ids), len(ids)), 0.5)
        np.fill_diagonal(belief, 0.0)
        known: set[int] = set()
        qualities: dict[int, float] = {}

        home = viewpoints[0]
        visited = {home.vid}
        obs = observe(scene, home, observation, rng)
        belief, _ = _merge_observation(belief, obs, index, known, qualities)

        grasped = False
        while not grasped:
            known_ids = sorted(known)
            rows = np.array([index[oid] for oid in known_ids], dtype=int)
            sub = AdjacencyMatrix(belief[np.ix_(rows, rows)])
            quality_vec = np.array([qualities[oid] for oid in known_ids])
            entropy = max_entropy(sub) if known_ids else None

            try:
                if policy == "quality_baseline":
                    action = baseline_step(known_ids, quality_vec)
                else:
                    action = entropy_gated_step(sub, known_ids, quality_vec,
                                                viewpoints, visited, params)
            except PolicyStuckError:
                failed = True
                break

            if action.kind == "view":
                views += 1
                visited.add(action.target)
                vp = next(v for v in viewpoints if v.vid == action.target)
                obs = observe(scene, vp, observation, rng)
                belief, conflict = _merge_observation(belief, obs, index, known, qualities)
                steps.append(StepRecord(action="view", target=action.target,
                                        entropy=entropy, detected=obs.object_ids,
                                        fusion_conflict=conflict))
                continue

            result = apply_grasp(scene, action.target, rng, outcome)
            attempts += 1
            if result.order_error:
                order_errors += 1
            if result.success:
                successes += 1
                consecutive_failures = 0
            else:
                consecutive_failures += 1
            steps.append(StepRecord(action="grasp", target=action.target,
                                    entropy=entropy, success=result.success,
                                    order_error=result.order_error,
                                    toppled=result.toppled, removed=result.removed))
            grasped = True
        if failed:
            break

    return EpisodeReport(policy=policy,
                         grasp_attempts=attempts,
                         grasp_successes=successes,
                         views_added=views,
                         order_errors=order_errors,
                         cleared=not scene.present_ids(),
                         failed=failed,
                         steps=tuple(steps))
