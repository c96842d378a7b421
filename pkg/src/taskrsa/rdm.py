"""RDM construction from feature matrices."""

from __future__ import annotations

import enum

import numpy as np

from .core import RDM, FeatureMatrix
from .errors import DegenerateVector
from .stats import degenerate_rows


class DegeneratePolicy(str, enum.Enum):
    """What to do with a constant feature row.

    ``ERROR`` raises; ``MAX_DISSIMILARITY`` treats the row's correlation with
    every other row as 0, i.e. dissimilarity 1.
    """

    ERROR = "error"
    MAX_DISSIMILARITY = "max"


def compute_rdm(features: FeatureMatrix, degenerate_policy=DegeneratePolicy.ERROR) -> RDM:
    """Pairwise ``1 - pearson(row_i, row_j)`` over the conditions of ``features``.

    Rows are centred once and every correlation is read off the Gram matrix
    as ``G_ij / sqrt(G_ii * G_jj)``; identical rows therefore correlate to
    exactly 1.  The upper triangle is mirrored so the result is exactly
    symmetric.
    """
    policy = DegeneratePolicy(degenerate_policy)
    data = features.data
    bad = degenerate_rows(data)
    if bad.any() and policy is DegeneratePolicy.ERROR:
        cond = features.conditions[int(np.flatnonzero(bad)[0])]
        raise DegenerateVector(
            f"task {features.task!r}: feature row of condition {cond!r} is constant",
            condition=cond,
        )

    centred = data - data.mean(axis=1, keepdims=True)
    # Per-row rescaling keeps the Gram entries away from overflow.
    scale = np.max(np.abs(centred), axis=1)
    scale[bad] = 1.0
    centred /= scale[:, None]
    centred[bad] = 0.0
    gram = centred @ centred.T
    diag = np.diag(gram).copy()
    diag[bad] = 1.0
    corr = gram / np.sqrt(np.outer(diag, diag))
    np.clip(corr, -1.0, 1.0, out=corr)
    values = 1.0 - corr
    upper = np.triu_indices(len(values), k=1)
    values.T[upper] = values[upper]
    np.fill_diagonal(values, 0.0)

    flagged = tuple(c for c, b in zip(features.conditions, bad) if b)
    return RDM(features.task, features.conditions, values, degenerate_conditions=flagged)


def lower_triangle(rdm: RDM) -> np.ndarray:
    """Entries ``(i, j)`` with ``i > j``, row by row.

    Order is ``(1,0), (2,0), (2,1), (3,0), ...`` so two RDMs over the same
    condition list vectorize element-aligned.
    """
    rows, cols = np.tril_indices(rdm.n_conditions, k=-1)
    return rdm.values[rows, cols].copy()
