"""RDM-pair similarity scores and task-similarity matrices."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import RDM, SimilarityMatrix, TaskMatrix, check_unique, require_same_conditions
from .errors import ConditionMismatch, TaskMismatch, ValidationError
from .rdm import lower_triangle
from .stats import correlate, rank_average_ties, spearman, spearman_from_ranks


def rdm_similarity(a: RDM, b: RDM) -> float:
    """Spearman correlation of the lower triangles of two RDMs."""
    require_same_conditions(a, b)
    return spearman(lower_triangle(a), lower_triangle(b))


def similarity_matrix(rdms: Sequence[RDM]) -> SimilarityMatrix:
    """T x T matrix of :func:`rdm_similarity` scores, unit diagonal."""
    rdms = list(rdms)
    if len(rdms) < 2:
        raise ValidationError(f"need at least 2 RDMs, got {len(rdms)}")
    tasks = check_unique([r.task for r in rdms], "task")
    first = rdms[0]
    for r in rdms[1:]:
        if r.conditions != first.conditions:
            raise ConditionMismatch(
                f"RDMs {first.task!r} and {r.task!r} are over different condition lists"
            )

    # Each triangle is ranked once; the pair scores are the same numbers
    # rdm_similarity would produce.
    n = len(rdms)
    ranks = [rank_average_ties(lower_triangle(r)) for r in rdms]
    values = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = spearman_from_ranks(ranks[i], ranks[j])
    return SimilarityMatrix(tasks, values)


def _column_pairs(a: TaskMatrix, b: np.ndarray):
    n = len(a.tasks)
    for j in range(n):
        keep = np.arange(n) != j
        yield a.values[keep, j], b[keep, j]


def matrix_correlation(
    a: TaskMatrix,
    b: TaskMatrix,
    method: str = "pearson",
    drop_diagonal: bool = True,
    per_column: bool = False,
) -> float:
    """Correlate two task matrices entrywise.

    By default every off-diagonal entry of ``a`` (row-major) is paired with
    the same entry of ``b`` and a single correlation is returned.  With
    ``per_column`` each column is correlated separately, its diagonal entry
    removed, and the mean of the column correlations is returned.

    ``b`` is aligned to ``a``'s task order by task id.
    """
    if set(a.tasks) != set(b.tasks):
        raise TaskMismatch(f"task lists differ: {sorted(set(a.tasks) ^ set(b.tasks))}")
    order = [b.index(t) for t in a.tasks]
    bv = b.values[np.ix_(order, order)]

    if per_column:
        return float(np.mean([correlate(x, y, method) for x, y in _column_pairs(a, bv)]))
    if drop_diagonal:
        mask = ~np.eye(len(a.tasks), dtype=bool)
        return correlate(a.values[mask], bv[mask], method)
    return correlate(a.values.ravel(), bv.ravel(), method)
