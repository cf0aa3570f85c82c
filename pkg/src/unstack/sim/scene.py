"""Ground-truth stacked scenes and seeded random scene generation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SceneGraph", "SceneObject", "generate_scene"]


@dataclass(frozen=True)
class SceneObject:
    oid: int
    label: str = "object"
    fragile: bool = False


@dataclass
class SceneGraph:
    """True stacking state of a bin: objects plus a direct-support DAG.

    An edge (a, b) means object a rests directly on object b. The graph
    mutates as grasps remove objects; `removed` records grasped ids.
    """

    objects: list[SceneObject]
    edges: set[tuple[int, int]] = field(default_factory=set)
    removed: set[int] = field(default_factory=set)

    def __post_init__(self):
        ids = {o.oid for o in self.objects}
        if len(ids) != len(self.objects):
            raise ValueError("object ids must be unique")
        for a, b in self.edges:
            if a == b or a not in ids or b not in ids:
                raise ValueError(f"edge ({a}, {b}) does not connect two distinct objects")
        self._assert_acyclic()

    def _assert_acyclic(self) -> None:
        below: dict[int, set[int]] = {}
        for a, b in self.edges:
            below.setdefault(a, set()).add(b)
        state: dict[int, int] = {}

        def visit(v: int) -> None:
            state[v] = 1
            for w in below.get(v, ()):
                if state.get(w) == 1:
                    raise ValueError(f"support edges contain a cycle through object {w}")
                if w not in state:
                    visit(w)
            state[v] = 2

        for o in self.objects:
            if o.oid not in state:
                visit(o.oid)

    # -- queries ------------------------------------------------------

    def present_ids(self) -> tuple[int, ...]:
        return tuple(sorted(o.oid for o in self.objects if o.oid not in self.removed))

    def is_present(self, oid: int) -> bool:
        return oid in {o.oid for o in self.objects} and oid not in self.removed

    def objects_on(self, oid: int) -> set[int]:
        """Ids resting directly on `oid`."""
        return {a for a, b in self.edges if b == oid}

    def supports_of(self, oid: int) -> set[int]:
        """Ids that `oid` rests directly on."""
        return {b for a, b in self.edges if a == oid}

    def true_adjacency(self, ids: tuple[int, ...]) -> np.ndarray:
        """0/1 matrix over the given id ordering."""
        index = {oid: k for k, oid in enumerate(ids)}
        matrix = np.zeros((len(ids), len(ids)))
        for a, b in self.edges:
            if a in index and b in index:
                matrix[index[a], index[b]] = 1.0
        return matrix

    # -- mutation -----------------------------------------------------

    def remove(self, oid: int) -> None:
        if not self.is_present(oid):
            raise ValueError(f"object {oid} is not present")
        self.removed.add(oid)
        self.edges = {(a, b) for a, b in self.edges if a != oid and b != oid}

    def drop_supports(self, oid: int) -> None:
        """Object `oid` slides off whatever it was resting on."""
        self.edges = {(a, b) for a, b in self.edges if a != oid}

    def clone(self) -> "SceneGraph":
        return SceneGraph(objects=list(self.objects),
                          edges=set(self.edges),
                          removed=set(self.removed))


def generate_scene(rng, n_objects: int, stacking_density: float,
                   fragile_prob: float = 0.0) -> SceneGraph:
    """Random physically plausible stack over `n_objects` objects.

    Objects are placed one at a time; each new object either lands on
    the floor or rests on one or two already placed objects, so every
    object has at most two supports and the graph is acyclic by
    construction. `stacking_density` in [0, 1] controls the expected
    number of support edges (0 gives an edgeless scene). The same rng
    seed reproduces the identical scene.
    """
    if n_objects < 1:
        raise ValueError("a scene needs at least one object")
    if not 0.0 <= stacking_density <= 1.0:
        raise ValueError("stacking_density must be in [0, 1]")
    rng = np.random.default_rng(rng)
    objects = [SceneObject(oid=k, fragile=bool(rng.random() < fragile_prob))
               for k in range(n_objects)]
    edges: set[tuple[int, int]] = set()
    for k in range(1, n_objects):
        if rng.random() >= stacking_density:
            continue  # placed on the floor
        two = k >= 2 and rng.random() < stacking_density / 2.0
        supports = rng.choice(k, size=2 if two else 1, replace=False)
        for s in supports:
            edges.add((k, int(s)))
    return SceneGraph(objects=objects, edges=edges)
