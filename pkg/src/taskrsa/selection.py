"""Source-model selection: similarity rankings and their agreement with
measured transfer performance."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import RDM, Ranking, TaskMatrix, check_task_id, check_unique, require_same_tasks
from .errors import ValidationError
from .similarity import rdm_similarity
from .stats import correlate


class Orientation(str, enum.Enum):
    HIGHER_BETTER = "higher_better"
    LOWER_BETTER = "lower_better"


@dataclass(frozen=True)
class AffinityTable:
    """Transfer performance of each source task on one target task.

    Raw values are kept as measured; ``orientation`` says which direction is
    better (mIoU is higher-better, a loss is lower-better).
    """

    target: str
    entries: tuple[tuple[str, float], ...]
    orientation: Orientation = Orientation.HIGHER_BETTER

    def __post_init__(self):
        check_task_id(self.target)
        entries = tuple((check_task_id(s), float(p)) for s, p in self.entries)
        if not entries:
            raise ValidationError("affinity table has no entries")
        check_unique([s for s, _ in entries], "source task")
        for s, p in entries:
            if not np.isfinite(p):
                raise ValidationError(f"non-finite performance for source {s!r}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    @property
    def sources(self) -> list[str]:
        return [s for s, _ in self.entries]

    def ordered_sources(self) -> list[str]:
        """Sources from best to worst, ties by ascending name."""
        sign = -1.0 if self.orientation is Orientation.HIGHER_BETTER else 1.0
        return [s for s, _ in sorted(self.entries, key=lambda e: (sign * e[1], e[0]))]

    def as_ranking(self) -> Ranking:
        """Ranking with better-is-larger scores (lower-better values negated)."""
        sign = 1.0 if self.orientation is Orientation.HIGHER_BETTER else -1.0
        return Ranking.from_scores(self.target, [(s, sign * p) for s, p in self.entries])


def rank_by_similarity(probe_rdm: RDM, candidates: Sequence[tuple[str, RDM]], probe_id=None) -> Ranking:
    """Order candidate models by RDM similarity to the probe, best first.

    ``probe_id`` labels the probe in the returned Ranking (default: the probe
    RDM's task).  Pass a distinct label when a candidate model was trained on
    the same task as the probe.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValidationError("need at least one candidate")
    check_unique([name for name, _ in candidates], "candidate")
    scores = [(name, rdm_similarity(probe_rdm, rdm)) for name, rdm in candidates]
    return Ranking.from_scores(probe_rdm.task if probe_id is None else probe_id, scores)


def rank_from_matrix(sim: TaskMatrix, probe: str) -> Ranking:
    """Ranking of every other task by its entry in ``probe``'s row of ``sim``.

    For a matrix built by :func:`similarity_matrix` this equals
    :func:`rank_by_similarity` over the other tasks' RDMs.
    """
    i = sim.index(probe)
    return Ranking.from_scores(
        probe, [(t, sim.values[i, j]) for j, t in enumerate(sim.tasks) if j != i]
    )


def topk_agreement(rsa: Ranking, transfer: AffinityTable, k: int) -> bool:
    """Whether the RSA-selected best source is among the ``k`` best by transfer."""
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    require_same_tasks(rsa.tasks, transfer.sources, "ranking and affinity sources")
    return rsa.top in transfer.ordered_sources()[:k]


def ranking_correlation(a: Ranking, b: Ranking, method: str = "pearson") -> float:
    """Correlate the scores of two rankings, aligned by task id."""
    require_same_tasks(a.tasks, b.tasks, "ranking task sets")
    sa, sb = a.scores(), b.scores()
    tasks = a.tasks
    return correlate([sa[t] for t in tasks], [sb[t] for t in tasks], method)


def stability_report(rankings: Sequence[Ranking], reference: Ranking, labels=None):
    """``(label, pearson, spearman)`` of each ranking against ``reference``.

    Labels default to each ranking's position in the input.
    """
    rankings = list(rankings)
    if labels is None:
        labels = [str(i) for i in range(len(rankings))]
    if len(labels) != len(rankings):
        raise ValidationError("one label per ranking required")
    return [
        (label, ranking_correlation(r, reference, "pearson"),
         ranking_correlation(r, reference, "spearman"))
        for label, r in zip(labels, rankings)
    ]
