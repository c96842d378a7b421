"""Correlation kernels: Pearson, tie-aware ranking and Spearman."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateVector, LengthMismatch, ValidationError

# A vector is degenerate when its variance falls below this fraction of its
# mean square, or below an absolute floor.
REL_VAR_TOL = 1e-12
ABS_VAR_TOL = 1e-300


class RankVector(NamedTuple):
    ranks: np.ndarray
    had_ties: bool


def _as_vector(x, name="x") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} contains non-finite values")
    return v


def _check_pair(x, y, min_len):
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if len(x) != len(y):
        raise LengthMismatch(f"vector lengths differ: {len(x)} vs {len(y)}")
    if len(x) < min_len:
        raise LengthMismatch(f"need at least {min_len} elements, got {len(x)}")
    return x, y


def degenerate_rows(data) -> np.ndarray:
    """Boolean mask of the rows of a 2-D array with numerically zero variance.

    The relative test runs on rows divided by their largest magnitude, which
    leaves it unchanged mathematically but keeps huge values from
    overflowing.
    """
    data = np.asarray(data, dtype=np.float64)
    peak = np.max(np.abs(data), axis=1)
    safe = np.where(peak > 0, peak, 1.0)
    scaled = data / safe[:, None]
    rel = scaled.var(axis=1) < REL_VAR_TOL * np.mean(scaled * scaled, axis=1)
    with np.errstate(over="ignore"):
        tiny = data.var(axis=1) < ABS_VAR_TOL
    return rel | tiny | (peak == 0)


def is_degenerate(x) -> bool:
    """True when ``x`` has numerically zero variance."""
    return bool(degenerate_rows(np.asarray(x, dtype=np.float64)[None, :])[0])


def pearson(x, y) -> float:
    """Sample Pearson correlation of two equal-length vectors.

    Raises :class:`DegenerateVector` if either input is constant.
    """
    x, y = _check_pair(x, y, 2)
    for v, name in ((x, "x"), (y, "y")):
        if is_degenerate(v):
            raise DegenerateVector(f"{name} has zero variance")
    xc = x - x.mean()
    yc = y - y.mean()
    xc /= np.max(np.abs(xc))
    yc /= np.max(np.abs(yc))
    r = float(np.dot(xc, yc) / np.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))
    return min(1.0, max(-1.0, r))


def rank_average_ties(x) -> RankVector:
    """Ascending ranks starting at 1; tied values share their mean rank."""
    x = _as_vector(x)
    if len(x) < 1:
        raise ValidationError("cannot rank an empty vector")
    ranks = rankdata(x, method="average")
    return RankVector(ranks, bool(len(np.unique(x)) < len(x)))


def spearman_closed_form(rx, ry) -> float:
    """``1 - 6 sum(d^2) / (n (n^2 - 1))`` for tie-free rank vectors."""
    rx = np.asarray(rx, dtype=np.float64)
    ry = np.asarray(ry, dtype=np.float64)
    n = len(rx)
    d = rx - ry
    return 1.0 - 6.0 * float(np.dot(d, d)) / (n * (n * n - 1.0))


def spearman(x, y) -> float:
    """Spearman rank correlation.

    Tie-free inputs use the closed form on integer ranks.  With ties the
    result is the Pearson correlation of the average ranks.
    """
    x, y = _check_pair(x, y, 3)
    return spearman_from_ranks(rank_average_ties(x), rank_average_ties(y))


def spearman_from_ranks(rx: RankVector, ry: RankVector) -> float:
    """Spearman correlation from precomputed rank vectors."""
    if len(rx.ranks) != len(ry.ranks):
        raise LengthMismatch(f"vector lengths differ: {len(rx.ranks)} vs {len(ry.ranks)}")
    if not (rx.had_ties or ry.had_ties):
        return spearman_closed_form(rx.ranks, ry.ranks)
    for r, name in ((rx, "x"), (ry, "y")):
        if np.all(r.ranks == r.ranks[0]):
            raise DegenerateVector(f"{name} is constant; rank variance is zero")
    return pearson(rx.ranks, ry.ranks)


def correlate(x, y, method: str = "pearson") -> float:
    """Dispatch on ``method`` (``"pearson"`` or ``"spearman"``)."""
    method = method.lower()
    if method == "pearson":
        return pearson(x, y)
    if method == "spearman":
        return spearman(x, y)
    raise ValueError(f"unknown correlation method {method!r}")
