"""Seeded benchmark ensembles comparing both policies over scenario types.

For every (scenario, seed) pair one scene is generated and cleared by
each policy from its own substream of the seed, so the comparison is
paired and bit-reproducible. Reported figures are means over episodes
of the per-episode rates: grasp success (successes / attempts), action
efficiency (successes / (attempts + views)), and the order-error rate
(attempts that targeted a supporting object / attempts).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from unstack.sim.episode import (EpisodeReport, GraspOutcomeModel, POLICIES,
                                 run_episode)
from unstack.sim.observe import ObservationModel, Viewpoint
from unstack.sim.policy import PolicyParams
from unstack.sim.scene import generate_scene

__all__ = ["BenchmarkRow", "EnsembleResult", "ScenarioSpec", "SimConfig",
           "default_config", "run_ensemble", "write_benchmark_csv",
           "write_episode_log"]


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    n_objects: int
    density: float
    fragile_prob: float = 0.0

    def __post_init__(self):
        if not self.name:
            raise ValueError("scenario name must be nonempty")
        if self.n_objects < 1:
            raise ValueError("n_objects must be at least 1")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must be in [0, 1]")
        if not 0.0 <= self.fragile_prob <= 1.0:
            raise ValueError("fragile_prob must be in [0, 1]")


@dataclass(frozen=True)
class SimConfig:
    scenarios: tuple[ScenarioSpec, ...]
    observation: ObservationModel = ObservationModel()
    outcome: GraspOutcomeModel = GraspOutcomeModel()
    policy: PolicyParams = PolicyParams()
    viewpoints: tuple[Viewpoint, ...] = tuple(Viewpoint(v) for v in range(8))
    failure_limit: int = 10
    seeds: int = 200

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("at least one scenario is required")
        names = [s.name for s in self.scenarios]
        if len(set(names)) != len(names):
            raise ValueError("scenario names must be unique")
        if not self.viewpoints:
            raise ValueError("at least one viewpoint is required")
        vids = [vp.vid for vp in self.viewpoints]
        if len(set(vids)) != len(vids):
            raise ValueError("viewpoint ids must be unique")
        if self.failure_limit < 1:
            raise ValueError("failure_limit must be at least 1")
        if self.seeds < 1:
            raise ValueError("seeds must be at least 1")


def default_config() -> SimConfig:
    """A stacked 'ordered' scenario and a larger loose 'random' pile."""
    return SimConfig(scenarios=(
        ScenarioSpec(name="ordered", n_objects=5, density=0.9),
        ScenarioSpec(name="random", n_objects=9, density=0.5),
    ))


@dataclass(frozen=True)
class BenchmarkRow:
    scenario: str
    policy: str
    episodes: int
    grasp_attempts: float
    grasp_successes: float
    views_added: float
    grasp_success_pct: float
    action_efficiency_pct: float
    order_error_pct: float


@dataclass(frozen=True)
class EnsembleResult:
    rows: tuple[BenchmarkRow, ...]
    episodes: Mapping[tuple[str, str], tuple[EpisodeReport, ...]] = field(default_factory=dict)
    seeds: tuple[int, ...] = ()


def episode_rates(report: EpisodeReport) -> tuple[float, float, float]:
    """(grasp success %, action efficiency %, order error %) of one episode."""
    attempts = report.grasp_attempts
    actions = attempts + report.views_added
    success = 100.0 * report.grasp_successes / attempts if attempts else 0.0
    efficiency = 100.0 * report.grasp_successes / actions if actions else 0.0
    order = 100.0 * report.order_errors / attempts if attempts else 0.0
    return success, efficiency, order


def _summarize(scenario: str, policy: str,
               reports: Sequence[EpisodeReport]) -> BenchmarkRow:
    rates = np.array([episode_rates(r) for r in reports])
    return BenchmarkRow(
        scenario=scenario,
        policy=policy,
        episodes=len(reports),
        grasp_attempts=float(np.mean([r.grasp_attempts for r in reports])),
        grasp_successes=float(np.mean([r.grasp_successes for r in reports])),
        views_added=float(np.mean([r.views_added for r in reports])),
        grasp_success_pct=float(rates[:, 0].mean()),
        action_efficiency_pct=float(rates[:, 1].mean()),
        order_error_pct=float(rates[:, 2].mean()),
    )


def run_ensemble(config: SimConfig, seeds: Sequence[int]) -> EnsembleResult:
    """Run every (scenario, policy) pair over the seed list.

    Episode k of policy p uses rng streams derived from
    (seed_k, scenario index, p), and both policies clear clones of the
    same generated scene, so results are reproducible and the policy
    comparison is paired. Aggregation is order-independent, and
    distinct seeds give independent episodes, so batches may be run in
    parallel and merged.
    """
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("at least one seed is required")
    if any(s < 0 for s in seeds):
        raise ValueError("seeds must be nonnegative")

    rows: list[BenchmarkRow] = []
    episodes: dict[tuple[str, str], tuple[EpisodeReport, ...]] = {}
    for s_idx, scenario in enumerate(config.scenarios):
        scenes = {
            seed: generate_scene(np.random.default_rng([seed, s_idx, 0]),
                                 scenario.n_objects, scenario.density,
                                 scenario.fragile_prob)
            for seed in seeds
        }
        for p_idx, policy in enumerate(POLICIES):
            reports = []
            for seed in seeds:
                rng = np.random.default_rng([seed, s_idx, 1 + p_idx])
                reports.append(run_episode(scenes[seed].clone(), policy,
                                           config.observation, config.outcome,
                                           config.viewpoints, rng,
                                           params=config.policy,
                                           failure_limit=config.failure_limit))
            episodes[(scenario.name, policy)] = tuple(reports)
            rows.append(_summarize(scenario.name, policy, reports))
    return EnsembleResult(rows=tuple(rows), episodes=episodes, seeds=tuple(seeds))


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


_CSV_COLUMNS = ("scenario", "policy", "episodes", "grasp_attempts", "grasp_successes",
                "views_added", "grasp_success_pct", "action_efficiency_pct",
                "order_error_pct")


def write_benchmark_csv(rows: Sequence[BenchmarkRow], path) -> None:
    """Benchmark table as CSV; formatting is deterministic byte for byte."""
    lines = [",".join(_CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(getattr(row, col)) for col in _CSV_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def write_episode_log(result: EnsembleResult, path) -> None:
    """One JSON object per line per episode, in deterministic order."""
    records = []
    for (scenario, policy), reports in sorted(result.episodes.items()):
        for seed, report in zip(result.seeds, reports):
            records.append(json.dumps({"scenario": scenario, "policy": policy,
                                       "seed": seed, "report": report.to_dict()},
                                      sort_keys=True))
    Path(path).write_text("\n".join(records) + "\n")
