"""Weighted-adjacency-matrix calculus for stacked-object scenes.

A scene of stacked objects forms a directed graph: an edge from i to j
means object i rests directly on object j. Because the stacking
structure must be inferred from noisy observations, every edge carries
an existence probability, and the whole graph is stored as a square
matrix whose (i, j) entry is P(i rests directly on j). The diagonal is
structurally zero.

Derived quantities provided here:

* matrix moments: entry (i, j) of the n-th power scores i sitting on j
  through chains of n direct-support hops,
* safe-grasp probabilities: per object, the probability that nothing
  rests on it, so grasping it disturbs nothing,
* Bayesian fusion of several views of the same scene into a posterior
  matrix,
* the maximum binary entropy of the safe-grasp vector, the statistic a
  policy can gate on to decide between grasping and looking again,
* topological layering of a thresholded hierarchy.

All edge events are treated as independent, and every logarithm is
natural (base e). Entropy values therefore live in [0, ln 2], roughly
[0, 0.693]; any threshold compared against them is base-dependent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import xlogy

__all__ = [
    "AdjacencyMatrix",
    "CycleError",
    "EdgeProbability",
    "FusionConflictError",
    "SafeGraspVector",
    "extract_order",
    "from_edges",
    "fuse",
    "max_entropy",
    "moment",
    "safe_grasp_probs",
    "support_counts",
]

# Saturation floor used by fuse(); exact 0 and exact 1 are deliberately
# not clamped so that hard contradictions stay detectable.
_CLAMP = 1e-12


class FusionConflictError(ValueError):
    """One view says an edge certainly exists, another says it certainly does not.

    The posterior for that cell is 0/0, which almost always means the
    object ordering was not consistent across views (broken data
    association), so the conflict is surfaced instead of silently
    resolved.
    """

    def __init__(self, i: int, j: int):
        self.cell = (i, j)
        super().__init__(
            f"irreconcilable observations for cell ({i}, {j}): "
            "one view reports probability 0 and another reports 1"
        )


class CycleError(ValueError):
    """The thresholded support graph contains a directed cycle."""

    def __init__(self, cycle: Sequence[int]):
        self.cycle = tuple(int(v) for v in cycle)
        path = " -> ".join(str(v) for v in self.cycle + (self.cycle[0],))
        super().__init__(f"support graph contains a cycle: {path}")


@dataclass(frozen=True)
class EdgeProbability:
    """Directed edge (i rests on j) with existence probability p."""

    i: int
    j: int
    p: float

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError(f"self-edge ({self.i}, {self.j}) is not allowed")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"edge probability {self.p} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Square matrix of edge-existence probabilities with a zero diagonal.

    Immutable after construction; all module operations are pure
    functions, so instances are safe to share across threads.
    """

    entries: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"adjacency matrix must be square, got shape {entries.shape}")
        if entries.size:
            if np.diagonal(entries).any():
                raise ValueError("adjacency diagonal must be exactly zero")
            if np.isnan(entries).any() or (entries < 0.0).any() or (entries > 1.0).any():
                raise ValueError("adjacency entries must lie in [0, 1]")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def allclose(self, other: "AdjacencyMatrix", atol: float = 1e-12) -> bool:
        return self.n == other.n and np.allclose(self.entries, other.entries, rtol=0.0, atol=atol)


@dataclass(frozen=True, eq=False)
class SafeGraspVector:
    """Per-object probability that nothing rests on the object."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1:
            raise ValueError("safe-grasp probabilities must form a vector")
        if probs.size and ((probs < 0.0).any() or (probs > 1.0).any()):
            raise ValueError("safe-grasp probabilities must lie in [0, 1]")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return self.probs.shape[0]

    def safest(self) -> int:
        """Index of the object least likely to support anything."""
        if not len(self):
            raise ValueError("empty safe-grasp vector")
        return int(np.argmax(self.probs))


def from_edges(n: int, edges: Iterable[EdgeProbability | tuple]) -> AdjacencyMatrix:
    """Build an n x n adjacency matrix from a sparse edge list.

    Plain (i, j, p) tuples are accepted alongside EdgeProbability.
    Raises ValueError on out-of-range indices, duplicate (i, j) pairs,
    self-edges, or probabilities outside [0, 1].
    """
    if n < 1:
        raise ValueError("object count must be at least 1")
    matrix = np.zeros((n, n))
    seen: set[tuple[int, int]] = set()
    for k, edge in enumerate(edges):
        if not isinstance(edge, EdgeProbability):
            edge = EdgeProbability(*edge)
        if not (0 <= edge.i < n and 0 <= edge.j < n):
            raise ValueError(f"edges[{k}]: indices ({edge.i}, {edge.j}) out of range for n={n}")
        if (edge.i, edge.j) in seen:
            raise ValueError(f"edges[{k}]: duplicate edge ({edge.i}, {edge.j})")
        seen.add((edge.i, edge.j))
        matrix[edge.i, edge.j] = edge.p
    return AdjacencyMatrix(matrix)


def moment(a: AdjacencyMatrix, degree: int) -> np.ndarray:
    """Matrix power A^degree, the multi-hop connection score.

    Entry (i, j) sums, over all directed paths of exactly `degree`
    edges from i to j, the product of the edge probabilities along the
    path. With several parallel paths the sum may exceed 1; the raw
    power is returned without renormalization.
    """
    if degree < 1:
        raise ValueError("moment degree must be at least 1")
    return np.linalg.matrix_power(a.entries, int(degree))


def support_counts(a: AdjacencyMatrix, max_degree: int) -> np.ndarray:
    """Expected number of objects each object supports, up to a hop limit.

    Entry j is the column sum of A + A^2 + ... + A^max_degree, i.e. the
    expected count of objects sitting on j directly or through at most
    max_degree - 1 intermediaries. The argmax is the most disruptive
    object to push or remove.
    """
    if not 1 <= max_degree <= a.n - 1:
        raise ValueError(f"max_degree must be in [1, {a.n - 1}], got {max_degree}")
    total = np.zeros_like(a.entries)
    power = np.eye(a.n)
    for _ in range(max_degree):
        power = power @ a.entries
        total += power
    return total.sum(axis=0)


def safe_grasp_probs(a: AdjacencyMatrix) -> SafeGraspVector:
    """Probability, per object, that no object rests directly on it.

    Under edge independence the probability for object i is the product
    over j of (1 - A[j, i]). The product is evaluated in log space as
    sum_j log(1 - A[j, i]) and exponentiated; columns containing an
    exact 1 bypass the log (where it is undefined) and yield an exact 0.
    """
    complements = 1.0 - a.entries
    certain = (complements <= 0.0).any(axis=0)
    logs = np.zeros_like(complements)
    np.log(complements, out=logs, where=complements > 0.0)
    probs = np.exp(logs.sum(axis=0))
    probs[certain] = 0.0
    return SafeGraspVector(probs)


def fuse(observations: Sequence[AdjacencyMatrix]) -> AdjacencyMatrix:
    """Bayesian fusion of per-view adjacency matrices into a posterior.

    Each cell is combined independently under a uniform prior:

        post[i, j] = prod_k A_k[i, j] / (prod_k (1 - A_k[i, j]) + prod_k A_k[i, j])

    A single observation is returned unchanged. Views reporting exactly
    0.5 for a cell leave its posterior untouched, and the combination is
    associative, so incremental fusion matches batch fusion.

    Probabilities in (0, 1) are clamped away from the boundaries by
    1e-12 so one nearly saturated view cannot annihilate the product;
    exact 0 and exact 1 are kept, and a cell receiving both raises
    FusionConflictError.
    """
    mats = list(observations)
    if not mats:
        raise ValueError("fuse requires at least one observation")
    n = mats[0].n
    for k, m in enumerate(mats):
        if m.n != n:
            raise ValueError(f"observation {k} has {m.n} objects, expected {n}")
    if len(mats) == 1:
        return mats[0]

    stack = np.stack([m.entries for m in mats])
    clamped = np.where((stack > 0.0) & (stack < _CLAMP), _CLAMP, stack)
    clamped = np.where((clamped < 1.0) & (clamped > 1.0 - _CLAMP), 1.0 - _CLAMP, clamped)
    # Multiplying in sorted order makes the result bit-exact under any
    # permutation of the observation list.
    present = np.prod(np.sort(clamped, axis=0), axis=0)
    absent = np.prod(np.sort(1.0 - clamped, axis=0), axis=0)
    total = present + absent
    dead = np.argwhere(total == 0.0)
    if dead.size:
        i, j = dead[0]
        raise FusionConflictError(int(i), int(j))
    return AdjacencyMatrix(present / total)


def max_entropy(a: AdjacencyMatrix) -> float:
    """Maximum binary entropy (nats) over the safe-grasp probabilities.

    Zero exactly when every safe-grasp probability is 0 or 1; at most
    ln 2. High values mean at least one object's clearance is genuinely
    uncertain, which is the cue to gather another view.
    """
    if a.n < 1:
        raise ValueError("entropy requires at least one object")
    p = safe_grasp_probs(a).probs
    entropies = -(xlogy(p, p) + xlogy(1.0 - p, 1.0 - p))
    return float(entropies.max())


def extract_order(a: AdjacencyMatrix, threshold: float) -> list[list[int]]:
    """Topological layers of the graph kept by thresholding the matrix.

    Edges with probability strictly above `threshold` are kept. Layer 0
    holds objects with nothing on top of them (safe to grasp first),
    layer 1 the objects uncovered once layer 0 is removed, and so on.
    Raises CycleError naming one cycle if the kept graph is cyclic.
    """
    kept = a.entries > threshold
    n = a.n
    # on_top[j] counts kept edges into j, i.e. objects resting on j.
    on_top = kept.sum(axis=0).astype(int)
    layers: list[list[int]] = []
    current = [i for i in range(n) if on_top[i] == 0]
    placed = 0
    while current:
        layers.append(current)
        placed += len(current)
        uncovered: list[int] = []
        for i in current:
            for j in np.flatnonzero(kept[i]):
                on_top[j] -= 1
                if on_top[j] == 0:
                    uncovered.append(int(j))
        current = sorted(uncovered)
    if placed < n:
        remaining = {i for i in range(n) if on_top[i] > 0}
        raise CycleError(_find_cycle(kept, remaining))
    return layers


def _find_cycle(kept: np.ndarray, remaining: set[int]) -> list[int]:
    """Walk predecessors among `remaining` until a node repeats."""
    node = min(remaining)
    order = {node: 0}
    path = [node]
    while True:
        node = next(i for i in sorted(remaining) if kept[i][node])
        if node in order:
            return path[order[node]:]
        order[node] = len(path)
        path.append(node)
