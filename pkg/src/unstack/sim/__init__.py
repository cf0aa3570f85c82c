"""Seeded bin-clearing simulator: scenes, observations, policies, benchmarks."""

from unstack.sim.ensemble import (BenchmarkRow, EnsembleResult, ScenarioSpec,
                                  SimConfig, default_config, episode_rates,
                                  run_ensemble, write_benchmark_csv,
                                  write_episode_log)
from unstack.sim.episode import (EpisodeReport, GraspOutcome, GraspOutcomeModel,
                                 POLICIES, StepRecord, apply_grasp, run_episode)
from unstack.sim.observe import (ObservationModel, ViewObservation, Viewpoint,
                                 info_gain_scores, observe)
from unstack.sim.policy import (PolicyAction, PolicyParams, PolicyStuckError,
                                baseline_step, entropy_gated_step)
from unstack.sim.scene import SceneGraph, SceneObject, generate_scene

__all__ = [
    "BenchmarkRow", "EnsembleResult", "EpisodeReport", "GraspOutcome",
    "GraspOutcomeModel", "ObservationModel", "POLICIES", "PolicyAction",
    "PolicyParams", "PolicyStuckError", "ScenarioSpec", "SceneGraph",
    "SceneObject", "SimConfig", "StepRecord", "ViewObservation", "Viewpoint",
    "apply_grasp", "baseline_step", "default_config", "entropy_gated_step",
    "episode_rates", "generate_scene", "info_gain_scores", "observe",
    "run_ensemble", "run_episode", "write_benchmark_csv", "write_episode_log",
]
