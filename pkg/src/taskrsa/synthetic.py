"""Synthetic task families with known group structure.

Each task's representation is built as::

    G_g = beta_g * L + (1 - beta_g) * H_g             (n_conditions x latent_dim)
    X_t = alpha_g * G_g + (1 - alpha_g) * P_t
    F_t = X_t @ W_t / sqrt(latent_dim) + noise_sigma * E_t

``L`` is a latent shared by every task, ``H_g`` is private to group ``g``
and ``P_t`` to task ``t``; ``W_t`` is a task-specific projection to
``feature_dim_per_task`` columns and ``E_t`` is Gaussian noise.  All of
these are standard normal draws.  ``alpha_g`` sets how alike the members of
a group are; ``beta_g`` (the group's ``shared_weight``, default 0) sets how
much of the study-wide latent the group carries, which grades the
similarity between groups.

Random stream
-------------
Every matrix comes from its own Philox4x64-10 stream (the Random123
generator, as exposed by ``numpy.random.Philox``).  The stream for a
matrix is keyed by ``(seed, (kind << 32) | index)``; block ``b`` of the
stream is the cipher applied to counter ``(b + 1, 0, 0, 0)`` and yields
four 64-bit words.  ``kind`` is 0 for the shared latent (index 0), 1 for
group latents (index = group position), 2 for private latents, 3 for
projections and 4 for noise (index = task position across all groups, in
listing order).  A task with
an entry in ``projection_seeds`` draws its projection from key
``(projection_seed, 3 << 32)`` instead.

Words are turned into normals pairwise with Box-Muller::

    u1 = ((w0 >> 11) + 1) * 2**-53        in (0, 1]
    u2 = (w1 >> 11) * 2**-53              in [0, 1)
    z0 = sqrt(-2 ln u1) cos(2 pi u2),  z1 = sqrt(-2 ln u1) sin(2 pi u2)

and matrices are filled row-major.  Because streams are per matrix and
filled row by row, a spec with more conditions extends the smaller one's
matrices by extra rows instead of redrawing them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import FeatureMatrix
from .errors import ValidationError

KIND_SHARED = 0
KIND_GROUP = 1
KIND_PRIVATE = 2
KIND_PROJECTION = 3
KIND_NOISE = 4

_U64 = 1 << 64


@dataclass(frozen=True)
class Group:
    name: str
    members: tuple[str, ...]
    alpha: float
    shared_weight: float = 0.0


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int
    n_conditions: int
    latent_dim: int
    groups: tuple[Group, ...]
    feature_dim_per_task: int
    noise_sigma: float
    projection_seeds: dict = field(default_factory=dict)

    def __post_init__(self):
        problems = []

        def is_int(v):
            return isinstance(v, (int, np.integer)) and not isinstance(v, bool)

        if not is_int(self.seed) or not 0 <= self.seed < _U64:
            problems.append("seed: must be an unsigned 64-bit integer")
        if not is_int(self.n_conditions) or self.n_conditions < 3:
            problems.append("n_conditions: must be an integer >= 3")
        for name in ("latent_dim", "feature_dim_per_task"):
            v = getattr(self, name)
            if not is_int(v) or v < 2:
                problems.append(f"{name}: must be an integer >= 2")
        if not isinstance(self.noise_sigma, (int, float)) or not (
            math.isfinite(self.noise_sigma) and self.noise_sigma >= 0
        ):
            problems.append("noise_sigma: must be finite and >= 0")

        groups = tuple(g if isinstance(g, Group) else Group(**g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        if not groups:
            problems.append("groups: at least one group required")
        seen_groups, seen_tasks = set(), set()
        for i, g in enumerate(groups):
            if not isinstance(g.name, str) or not g.name or g.name in seen_groups:
                problems.append(f"groups[{i}].name: must be a unique non-empty string")
            seen_groups.add(g.name)
            if isinstance(g.members, str) or not g.members:
                problems.append(f"groups[{i}].members: must be a non-empty list of names")
                continue
            object.__setattr__(g, "members", tuple(g.members))
            for m in g.members:
                if not isinstance(m, str) or not m or m in seen_tasks:
                    problems.append(f"groups[{i}].members: task name {m!r} empty or repeated")
                seen_tasks.add(m)
            if not isinstance(g.alpha, (int, float)) or not (
                math.isfinite(g.alpha) and 0.0 <= g.alpha <= 1.0
            ):
                problems.append(f"groups[{i}].alpha: must be in [0, 1]")
            if not isinstance(g.shared_weight, (int, float)) or not (
                math.isfinite(g.shared_weight) and 0.0 <= g.shared_weight <= 1.0
            ):
                problems.append(f"groups[{i}].shared_weight: must be in [0, 1]")
        for task, s in dict(self.projection_seeds).items():
            if task not in seen_tasks:
                problems.append(f"projection_seeds: unknown task {task!r}")
            elif not is_int(s) or not 0 <= s < _U64:
                problems.append(f"projection_seeds[{task!r}]: must be an unsigned 64-bit integer")
        if problems:
            raise ValidationError("invalid synthetic spec: " + "; ".join(problems))

    @property
    def tasks(self) -> list[str]:
        return [m for g in self.groups for m in g.members]

    def replace(self, **changes) -> "SyntheticSpec":
        fields = dict(
            seed=self.seed,
            n_conditions=self.n_conditions,
            latent_dim=self.latent_dim,
            groups=self.groups,
            feature_dim_per_task=self.feature_dim_per_task,
            noise_sigma=self.noise_sigma,
            projection_seeds=dict(self.projection_seeds),
        )
        fields.update(changes)
        return SyntheticSpec(**fields)


def raw_words(seed: int, stream: int, n: int) -> np.ndarray:
    """First ``n`` 64-bit words of the Philox stream keyed by ``(seed, stream)``."""
    bitgen = np.random.Philox(key=np.array([seed, stream], dtype=np.uint64), counter=0)
    return bitgen.random_raw(n)


def normals(seed: int, stream: int, n: int) -> np.ndarray:
    """``n`` standard normal draws via Box-Muller on the raw stream."""
    words = raw_words(seed, stream, 2 * ((n + 1) // 2)).reshape(-1, 2)
    scale = 2.0 ** -53
    u1 = ((words[:, 0] >> np.uint64(11)).astype(np.float64) + 1.0) * scale
    u2 = (words[:, 1] >> np.uint64(11)).astype(np.float64) * scale
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty((len(words), 2))
    out[:, 0] = radius * np.cos(angle)
    out[:, 1] = radius * np.sin(angle)
    return out.ravel()[:n]


def normal_matrix(seed: int, kind: int, index: int, rows: int, cols: int) -> np.ndarray:
    """Standard normal matrix from stream ``(kind, index)``, filled row-major.

    Matrices of different heights drawn from one stream share their
    leading rows.
    """
    return normals(seed, (kind << 32) | index, rows * cols).reshape(rows, cols)


def condition_ids(n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"c{i:0{width}d}" for i in range(n)]


def generate(spec: SyntheticSpec) -> list[FeatureMatrix]:
    """Feature matrices for every task of ``spec``, in listing order."""
    n, dim, fdim = spec.n_conditions, spec.latent_dim, spec.feature_dim_per_task
    conditions = condition_ids(n)
    study = normal_matrix(spec.seed, KIND_SHARED, 0, n, dim)
    out = []
    t = 0
    for g_index, group in enumerate(spec.groups):
        beta = group.shared_weight
        shared = beta * study + (1.0 - beta) * normal_matrix(spec.seed, KIND_GROUP, g_index, n, dim)
        for task in group.members:
            private = normal_matrix(spec.seed, KIND_PRIVATE, t, n, dim)
            if task in spec.projection_seeds:
                proj = normal_matrix(spec.projection_seeds[task], KIND_PROJECTION, 0, dim, fdim)
            else:
                proj = normal_matrix(spec.seed, KIND_PROJECTION, t, dim, fdim)
            latent = group.alpha * shared + (1.0 - group.alpha) * private
            data = latent @ proj / math.sqrt(dim)
            if spec.noise_sigma > 0:
                data = data + spec.noise_sigma * normal_matrix(spec.seed, KIND_NOISE, t, n, fdim)
            out.append(FeatureMatrix(task, conditions, data))
            t += 1
    return out
