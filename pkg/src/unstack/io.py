"""JSON file schemas for adjacency matrices, detections, annotations, and sim configs.

Adjacency file, either sparse or dense:

    {"n": 3, "edges": [{"i": 0, "j": 1, "p": 0.8}, ...]}
    {"matrix": [[0.0, 0.8], [0.0, 0.0]]}

Detection file, one per image (boxes are pixel corners, normalized on
load by the stated image size; class_probs rows end with the
unknown/empty class):

    {"image": {"w": 640, "h": 480},
     "boxes": [[x1, y1, x2, y2], ...],
     "class_probs": [[...], ...],
     "adjacency": [[...], ...]}

Ground-truth file, mirrored from pixel-corner annotation sets
([i, j] in "edges" means object i rests directly on object j):

    {"objects": [{"class": "box", "box": [x1, y1, x2, y2]}, ...],
     "edges": [[0, 1], ...]}

Simulator config: see load_sim_config. Unknown keys anywhere in a
config are collected and reported together.
"""

from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path
from typing import Mapping

import numpy as np

from unstack.adjacency import AdjacencyMatrix, from_edges
from unstack.boxes import BBox
from unstack.matching import GroundTruth, Prediction
from unstack.sim.ensemble import ScenarioSpec, SimConfig
from unstack.sim.episode import GraspOutcomeModel
from unstack.sim.observe import ObservationModel, Viewpoint
from unstack.sim.policy import PolicyParams

__all__ = [
    "build_class_index",
    "dump_adjacency",
    "load_adjacency",
    "load_detections",
    "load_ground_truth",
    "load_sim_config",
]


def _read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ValueError(f"{path}: {err.strerror or err}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"{path}: line {err.lineno}, column {err.colno}: {err.msg}") from err
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object at top level")
    return data


def load_adjacency(path) -> AdjacencyMatrix:
    data = _read_json(path)
    if "matrix" in data:
        try:
            return AdjacencyMatrix(np.array(data["matrix"], dtype=float))
        except (TypeError, ValueError) as err:
            raise ValueError(f"{path}: bad 'matrix': {err}") from err
    if "n" in data and "edges" in data:
        try:
            edges = [(e["i"], e["j"], e["p"]) for e in data["edges"]]
            return from_edges(int(data["n"]), edges)
        except (TypeError, KeyError) as err:
            raise ValueError(f"{path}: malformed edge list: {err}") from err
        except ValueError as err:
            raise ValueError(f"{path}: {err}") from err
    raise ValueError(f"{path}: expected either a 'matrix' key or 'n' plus 'edges'")


def dump_adjacency(a: AdjacencyMatrix, path) -> None:
    payload = {"matrix": [[float(v) for v in row] for row in a.entries]}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_detections(path) -> tuple[Prediction, tuple[int, int]]:
    """Returns the Prediction and the (width, height) the boxes were normalized by."""
    data = _read_json(path)
    for key in ("boxes", "class_probs", "adjacency", "image"):
        if key not in data:
            raise ValueError(f"{path}: missing key '{key}'")
    image = data["image"]
    if not isinstance(image, dict) or "w" not in image or "h" not in image:
        raise ValueError(f"{path}: 'image' must carry 'w' and 'h'")
    width, height = int(image["w"]), int(image["h"])
    try:
        boxes = tuple(BBox.from_pixels(*box, width, height) for box in data["boxes"])
        pred = Prediction(boxes=boxes,
                          class_probs=np.array(data["class_probs"], dtype=float),
                          adjacency=np.array(data["adjacency"], dtype=float))
    except (TypeError, ValueError) as err:
        raise ValueError(f"{path}: {err}") from err
    return pred, (width, height)


def load_ground_truth(path, image_size: tuple[int, int],
                      class_index: Mapping[str, int] | None = None) -> GroundTruth:
    """Load annotations, normalizing pixel boxes by the paired image size.

    String class labels need `class_index` to resolve them to class
    columns; integer labels are used directly.
    """
    data = _read_json(path)
    for key in ("objects", "edges"):
        if key not in data:
            raise ValueError(f"{path}: missing key '{key}'")
    width, height = image_size
    boxes = []
    classes = []
    for k, obj in enumerate(data["objects"]):
        try:
            boxes.append(BBox.from_pixels(*obj["box"], width, height))
            label = obj["class"]
        except (TypeError, KeyError, ValueError) as err:
            raise ValueError(f"{path}: objects[{k}]: {err}") from err
        if isinstance(label, str):
            if class_index is None or label not in class_index:
                raise ValueError(f"{path}: objects[{k}]: no class index for label {label!r}")
            classes.append(class_index[label])
        else:
            classes.append(int(label))
    n = len(boxes)
    adjacency = np.zeros((n, n))
    for k, edge in enumerate(data["edges"]):
        try:
            i, j = (int(v) for v in edge)
        except (TypeError, ValueError) as err:
            raise ValueError(f"{path}: edges[{k}]: {err}") from err
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValueError(f"{path}: edges[{k}]: bad pair ({i}, {j}) for {n} objects")
        adjacency[i, j] = 1.0
    try:
        return GroundTruth(boxes=tuple(boxes), classes=tuple(classes), adjacency=adjacency)
    except ValueError as err:
        raise ValueError(f"{path}: {err}") from err


def build_class_index(paths) -> dict[str, int]:
    """Stable label -> column mapping: sorted unique string labels across files."""
    labels: set[str] = set()
    for path in paths:
        data = _read_json(path)
        for obj in data.get("objects", []):
            label = obj.get("class")
            if isinstance(label, str):
                labels.add(label)
    return {label: k for k, label in enumerate(sorted(labels))}


# -- simulator config ------------------------------------------------


def _known_subset(cls, mapping, prefix: str, offenders: list[str]) -> dict:
    known = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in mapping.items():
        if key not in known:
            offenders.append(prefix + key)
        else:
            kwargs[key] = value
    return kwargs


def load_sim_config(path) -> SimConfig:
    """Parse and validate a simulator config.

    Top-level keys: scenarios (name -> {n_objects, density,
    fragile_prob}), observation, outcome, policy (each mirroring the
    corresponding dataclass fields), viewpoints (a count, or {count,
    qualities}), failure_limit, seeds. Unknown keys at any level are an
    error listing every offender.
    """
    data = _read_json(path)
    offenders: list[str] = []
    top_known = {"scenarios", "observation", "outcome", "policy",
                 "viewpoints", "failure_limit", "seeds"}
    offenders.extend(key for key in data if key not in top_known)

    scenario_kwargs = [
        _known_subset(ScenarioSpec, {"name": name, **spec}, f"scenarios.{name}.", offenders)
        for name, spec in data.get("scenarios", {}).items()
    ]
    observation_kwargs = _known_subset(ObservationModel, data.get("observation", {}),
                                       "observation.", offenders)
    outcome_kwargs = _known_subset(GraspOutcomeModel, data.get("outcome", {}),
                                   "outcome.", offenders)
    policy_kwargs = _known_subset(PolicyParams, data.get("policy", {}),
                                  "policy.", offenders)

    raw_viewpoints = data.get("viewpoints", 8)
    if isinstance(raw_viewpoints, dict):
        offenders.extend(f"viewpoints.{key}" for key in raw_viewpoints
                         if key not in ("count", "qualities"))

    if offenders:
        raise ValueError(f"{path}: unknown config keys: " + ", ".join(sorted(offenders)))

    try:
        if isinstance(raw_viewpoints, dict):
            qualities = raw_viewpoints.get("qualities")
            if qualities is None:
                qualities = [1.0] * int(raw_viewpoints.get("count", 8))
            viewpoints = tuple(Viewpoint(v, float(q)) for v, q in enumerate(qualities))
        elif isinstance(raw_viewpoints, int) and not isinstance(raw_viewpoints, bool):
            viewpoints = tuple(Viewpoint(v) for v in range(raw_viewpoints))
        else:
            raise ValueError("'viewpoints' must be a count or an object")
        return SimConfig(scenarios=tuple(ScenarioSpec(**kw) for kw in scenario_kwargs),
                         observation=ObservationModel(**observation_kwargs),
                         outcome=GraspOutcomeModel(**outcome_kwargs),
                         policy=PolicyParams(**policy_kwargs),
                         viewpoints=viewpoints,
                         failure_limit=int(data.get("failure_limit", 10)),
                         seeds=int(data.get("seeds", 200)))
    except (TypeError, ValueError) as err:
        raise ValueError(f"{path}: {err}") from err
