import json
from pathlib import Path

import numpy as np
import pytest

from taskrsa.io import spec_from_dict

FIXTURES = Path(__file__).parent / "fixtures"

# Seeds on which the synthetic end-to-end checks are run.
DOCUMENTED_SEEDS = list(range(10))


def load_fixture_spec(**changes):
    spec = spec_from_dict(json.loads((FIXTURES / "synthetic_fixture.json").read_text()))
    return spec.replace(**changes) if changes else spec


def fixture_groups(spec):
    return {m: g.name for g in spec.groups for m in g.members}


@pytest.fixture
def fixture_spec():
    return load_fixture_spec()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Tasks of the segmentation affinity fixture, in the order their RDMs
# should resemble the probe's (most similar first).
AFFINITY_RSA_ORDER = [
    "Object class",
    "Scene class",
    "Occlusion edges",
    "Semantic segmentation",
    "Autoencoder",
    "Vanishing point",
]
AFFINITY_PROBE = "Pascal VOC segmentation"


def affinity_rdms(n_conditions=8):
    """Probe and candidate RDMs whose similarity order is AFFINITY_RSA_ORDER.

    The probe triangle is strictly increasing; candidate ``j`` swaps ``j + 1``
    disjoint adjacent pairs, so each extra swap lowers the Spearman score by
    a fixed step.
    """
    from taskrsa.core import RDM

    conds = [f"c{i}" for i in range(n_conditions)]
    m = n_conditions * (n_conditions - 1) // 2
    tri = np.linspace(0.1, 1.9, m)
    rows, cols = np.tril_indices(n_conditions, k=-1)

    def make(task, t):
        v = np.zeros((n_conditions, n_conditions))
        v[rows, cols] = t
        v[cols, rows] = t
        return RDM(task, conds, v)

    probe = make(AFFINITY_PROBE, tri)
    cands = []
    for j, task in enumerate(AFFINITY_RSA_ORDER):
        t = tri.copy()
        for s in range(j + 1):
            t[2 * s], t[2 * s + 1] = t[2 * s + 1], t[2 * s]
        cands.append(make(task, t))
    return probe, cands
