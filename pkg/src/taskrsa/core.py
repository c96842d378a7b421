"""Domain types shared by the rest of the package.

All containers are frozen dataclasses holding read-only numpy arrays, so
they can be passed between threads without copying.  Validation happens in
``__post_init__``; an instance that exists satisfies its invariants.

Task identifiers are plain strings.  Condition order is fixed by the
:class:`FeatureMatrix` and inherited by every RDM derived from it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConditionMismatch, TaskMismatch, ValidationError

# Symmetry tolerance used when validating matrices that were not produced
# by this package (files, user arrays).
SYMMETRY_TOL = 1e-9


def check_task_id(name) -> str:
    if not isinstance(name, str) or not name:
        raise ValidationError(f"task id must be a non-empty string, got {name!r}")
    return name


def check_unique(names: Sequence[str], what: str) -> tuple[str, ...]:
    seen = set()
    for name in names:
        if name in seen:
            raise ValidationError(f"duplicate {what} {name!r}")
        seen.add(name)
    return tuple(names)


def _frozen_array(values, shape=None) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if shape is not None and arr.shape != shape:
        raise ValidationError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Representation of ``n_c`` conditions by one task's model.

    ``data`` has one row per condition; each row is a flat feature vector.
    """

    task: str
    conditions: tuple[str, ...]
    data: np.ndarray

    def __post_init__(self):
        check_task_id(self.task)
        conditions = tuple(str(c) for c in self.conditions)
        object.__setattr__(self, "conditions", check_unique(conditions, "condition id"))
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValidationError(f"feature data must be 2-D, got ndim={data.ndim}")
        n_c, n_f = data.shape
        if n_c != len(conditions):
            raise ValidationError(f"{n_c} data rows but {len(conditions)} condition ids")
        if n_c < 3:
            raise ValidationError(f"need at least 3 conditions, got {n_c}")
        if n_f < 2:
            raise ValidationError(f"need at least 2 features, got {n_f}")
        if not np.all(np.isfinite(data)):
            row = int(np.argwhere(~np.isfinite(data))[0][0])
            raise ValidationError(f"non-finite feature value in condition {conditions[row]!r}")
        object.__setattr__(self, "data", _frozen_array(data))

    @property
    def n_conditions(self) -> int:
        return self.data.shape[0]

    @property
    def n_features(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class RDM:
    """Representational dissimilarity matrix, entries ``1 - pearson``.

    ``degenerate_conditions`` lists conditions whose feature row had zero
    variance when the RDM was built with the max-dissimilarity policy.
    """

    task: str
    conditions: tuple[str, ...]
    values: np.ndarray
    degenerate_conditions: tuple[str, ...] = ()

    def __post_init__(self):
        check_task_id(self.task)
        conditions = check_unique(tuple(str(c) for c in self.conditions), "condition id")
        object.__setattr__(self, "conditions", conditions)
        n = len(conditions)
        if n < 3:
            raise ValidationError(f"RDM needs at least 3 conditions, got {n}")
        values = _frozen_array(self.values, (n, n))
        if not np.all(np.isfinite(values)):
            raise ValidationError("RDM contains non-finite values")
        if not np.array_equal(values, values.T):
            raise ValidationError("RDM is not exactly symmetric")
        if np.any(np.diag(values) != 0.0):
            raise ValidationError("RDM diagonal must be exactly 0")
        if values.min() < 0.0 or values.max() > 2.0:
            raise ValidationError("RDM entries must lie in [0, 2]")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "degenerate_conditions", tuple(self.degenerate_conditions))

    @property
    def n_conditions(self) -> int:
        return len(self.conditions)


@dataclass(frozen=True, eq=False)
class TaskMatrix:
    """Square task-by-task matrix with no structural invariants.

    Used for external matrices such as transfer affinities, which are
    neither symmetric nor unit-diagonal.
    """

    tasks: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        tasks = check_unique(tuple(check_task_id(t) for t in self.tasks), "task id")
        object.__setattr__(self, "tasks", tasks)
        n = len(tasks)
        values = _frozen_array(self.values, (n, n))
        if not np.all(np.isfinite(values)):
            raise ValidationError("matrix contains non-finite values")
        object.__setattr__(self, "values", values)

    def index(self, task: str) -> int:
        return self.tasks.index(task)


@dataclass(frozen=True, eq=False)
class SimilarityMatrix(TaskMatrix):
    """Symmetric matrix of RDM-pair Spearman scores with unit diagonal."""

    def __post_init__(self):
        super().__post_init__()
        v = self.values
        if len(self.tasks) < 2:
            raise ValidationError("similarity matrix needs at least 2 tasks")
        if not np.array_equal(v, v.T):
            raise ValidationError("similarity matrix is not exactly symmetric")
        if np.any(np.diag(v) != 1.0):
            raise ValidationError("similarity matrix diagonal must be exactly 1")
        if v.min() < -1.0 or v.max() > 1.0:
            raise ValidationError("similarity entries must lie in [-1, 1]")


TIE_RULE = "score descending, ties by ascending task name"


@dataclass(frozen=True)
class Ranking:
    """Candidate tasks ordered by score, best first.

    The probe never appears among ``ordered``.
    """

    probe: str
    ordered: tuple[tuple[str, float], ...]
    tie_rule: str = TIE_RULE

    def __post_init__(self):
        check_task_id(self.probe)
        ordered = tuple((check_task_id(t), float(s)) for t, s in self.ordered)
        check_unique([t for t, _ in ordered], "ranked task")
        for task, score in ordered:
            if task == self.probe:
                raise ValidationError(f"probe {task!r} may not rank itself")
            if not np.isfinite(score):
                raise ValidationError(f"non-finite score for {task!r}")
        for (t0, s0), (t1, s1) in zip(ordered, ordered[1:]):
            if s1 > s0 or (s1 == s0 and t1 < t0):
                raise ValidationError(f"ranking out of order at {t0!r}, {t1!r}")
        object.__setattr__(self, "ordered", ordered)

    @classmethod
    def from_scores(cls, probe: str, scores) -> "Ranking":
        """Build a ranking from ``(task, score)`` pairs in any order."""
        items = sorted(((t, float(s)) for t, s in scores), key=lambda ts: (-ts[1], ts[0]))
        return cls(probe, tuple(items))

    @property
    def tasks(self) -> list[str]:
        return [t for t, _ in self.ordered]

    @property
    def top(self) -> str:
        return self.ordered[0][0]

    def scores(self) -> dict[str, float]:
        return dict(self.ordered)

    def __len__(self):
        return len(self.ordered)


def require_same_conditions(a: RDM, b: RDM) -> None:
    if a.conditions != b.conditions:
        raise ConditionMismatch(
            f"RDMs {a.task!r} and {b.task!r} are over different condition lists"
        )


def require_same_tasks(a: Sequence[str], b: Sequence[str], what: str = "task sets") -> None:
    if set(a) != set(b) or len(a) != len(b):
        only_a = sorted(set(a) - set(b))
        only_b = sorted(set(b) - set(a))
        raise TaskMismatch(f"{what} differ: only in first {only_a}, only in second {only_b}")
