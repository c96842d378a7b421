"""Agglomerative clustering of tasks from a similarity matrix.

Distances are ``1 - similarity``.  Node indices follow the usual
convention: leaves are ``0..T-1`` in input order and the k-th merge creates
node ``T + k``.  Among equally close cluster pairs the one whose
``(smaller node index, larger node index)`` is lexicographically least is
merged first, which makes the output platform independent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import SYMMETRY_TOL, TaskMatrix, check_unique
from .errors import InvalidK, InvalidSimilarity, ValidationError

TIE_BREAK = "lexicographic-min-node-pair"

# Heights may dip by rounding when weighted averages are formed.
HEIGHT_TOL = 1e-12


class Linkage(str, enum.Enum):
    AVERAGE = "average"
    COMPLETE = "complete"
    SINGLE = "single"


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[str, ...]
    merges: tuple[Merge, ...]
    linkage: str = Linkage.AVERAGE.value
    tie_break: str = TIE_BREAK

    def __post_init__(self):
        leaves = check_unique(tuple(self.leaves), "leaf")
        merges = tuple(m if isinstance(m, Merge) else Merge(*m) for m in self.merges)
        object.__setattr__(self, "leaves", leaves)
        object.__setattr__(self, "merges", merges)
        n = len(leaves)
        if n < 1:
            raise ValidationError("dendrogram needs at least one leaf")
        if len(merges) != n - 1:
            raise ValidationError(f"{n} leaves need {n - 1} merges, got {len(merges)}")
        heights = [0.0] * n
        has_parent = [False] * (2 * n - 1)
        for k, m in enumerate(merges):
            node = n + k
            for child in (m.left, m.right):
                if not 0 <= child < node:
                    raise ValidationError(f"merge {k} references unknown node {child}")
                if has_parent[child]:
                    raise ValidationError(f"node {child} merged twice")
                has_parent[child] = True
            if m.left == m.right:
                raise ValidationError(f"merge {k} joins node {m.left} with itself")
            h = float(m.height)
            if not np.isfinite(h) or h < 0:
                raise ValidationError(f"merge {k} has invalid height {m.height!r}")
            if h < max(heights[m.left], heights[m.right]) - HEIGHT_TOL:
                raise ValidationError(f"merge {k} is lower than one of its children")
            heights.append(h)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def node_height(self, node: int) -> float:
        n = self.n_leaves
        return 0.0 if node < n else self.merges[node - n].height

    def members(self, node: int) -> list[int]:
        """Leaf indices under ``node``, left subtree first."""
        n = self.n_leaves
        out, stack = [], [node]
        while stack:
            v = stack.pop()
            if v < n:
                out.append(v)
            else:
                m = self.merges[v - n]
                stack.append(m.right)
                stack.append(m.left)
        return out


def distance_matrix(sim: TaskMatrix) -> np.ndarray:
    """Validated ``1 - sim`` with a zero diagonal."""
    v = sim.values
    if v.max() > 1.0 + SYMMETRY_TOL:
        raise InvalidSimilarity(f"similarity {v.max()!r} exceeds 1")
    if np.max(np.abs(v - v.T)) > SYMMETRY_TOL:
        raise InvalidSimilarity("similarity matrix is asymmetric")
    d = np.maximum(1.0 - v, 0.0)
    np.fill_diagonal(d, 0.0)
    return d


def cluster(sim: TaskMatrix, linkage=Linkage.AVERAGE) -> Dendrogram:
    """Agglomerate the tasks of ``sim`` into a binary tree.

    Average linkage keeps, for each pair of active clusters, the sum of the
    leaf-pair distances between them, so merged rows are updated by plain
    addition and the linkage distance is ``sum / (n_a * n_b)``.
    """
    linkage = Linkage(linkage)
    d = distance_matrix(sim)
    n = len(sim.tasks)
    if n < 2:
        raise ValidationError("need at least 2 tasks to cluster")

    # Work arrays are indexed by node id; inactive rows are ignored.
    size = 2 * n - 1
    agg = np.full((size, size), np.nan)
    agg[:n, :n] = d
    counts = np.zeros(size, dtype=np.int64)
    counts[:n] = 1
    active = list(range(n))
    merges = []

    def link(a, b):
        if linkage is Linkage.AVERAGE:
            return agg[a, b] / (counts[a] * counts[b])
        return agg[a, b]

    for k in range(n - 1):
        best = None
        for ia, a in enumerate(active):
            for b in active[ia + 1:]:
                dist = link(a, b)
                if best is None or dist < best[0]:
                    best = (dist, a, b)
        dist, a, b = best
        node = n + k
        merges.append(Merge(a, b, float(dist)))
        active.remove(a)
        active.remove(b)
        for c in active:
            if linkage is Linkage.AVERAGE:
                val = agg[a, c] + agg[b, c]
            elif linkage is Linkage.COMPLETE:
                val = max(agg[a, c], agg[b, c])
            else:
                val = min(agg[a, c], agg[b, c])
            agg[node, c] = agg[c, node] = val
        counts[node] = counts[a] + counts[b]
        active.append(node)

    return Dendrogram(tuple(sim.tasks), tuple(merges), linkage=linkage.value)


def cut(dend: Dendrogram, k: int) -> dict[str, int]:
    """Flat clustering into ``k`` groups by undoing the ``k - 1`` highest merges.

    Cluster labels are numbered by first appearance in ``dend.leaves``.
    """
    n = dend.n_leaves
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= n:
        raise InvalidK(f"k must be an integer in [1, {n}], got {k!r}")

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # Merges come in non-decreasing height order, so the k-1 highest are
    # the last k-1; each merge unions the leaves under its two children.
    for m in dend.merges[: n - k]:
        left = dend.members(m.left)
        right = dend.members(m.right)
        parent[find(right[0])] = find(left[0])

    labels, out = {}, {}
    for i, leaf in enumerate(dend.leaves):
        root = find(i)
        if root not in labels:
            labels[root] = len(labels)
        out[leaf] = labels[root]
    return out
