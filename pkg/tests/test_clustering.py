import numpy as np
import pytest

import oracles
from taskrsa.clustering import Dendrogram, Merge, cluster, cut
from taskrsa.core import SimilarityMatrix, TaskMatrix
from taskrsa.errors import InvalidK, InvalidSimilarity, ValidationError

LINKAGES = ["average", "complete", "single"]


def random_sim(rng, n, quantum=None):
    v = rng.uniform(-1, 1, size=(n, n))
    if quantum:
        v = np.round(v / quantum) * quantum
    v = np.triu(v, 1)
    v = v + v.T
    np.fill_diagonal(v, 1.0)
    return SimilarityMatrix([f"t{i}" for i in range(n)], v)


def block_sim():
    v = np.full((4, 4), 0.1)
    v[:2, :2] = v[2:, 2:] = 0.9
    np.fill_diagonal(v, 1.0)
    return SimilarityMatrix(["a", "b", "c", "d"], v)


def as_tuples(dend):
    return [(m.left, m.right, m.height) for m in dend.merges]


def test_two_tasks():
    sim = SimilarityMatrix(["x", "y"], [[1.0, 0.3], [0.3, 1.0]])
    dend = cluster(sim)
    assert as_tuples(dend) == [(0, 1, 1 - 0.3)]


def test_block_structure():
    dend = cluster(block_sim(), "average")
    h = [m.height for m in dend.merges]
    assert (dend.merges[0].left, dend.merges[0].right) == (0, 1)
    assert (dend.merges[1].left, dend.merges[1].right) == (2, 3)
    assert h[0] == pytest.approx(0.1) and h[1] == pytest.approx(0.1)
    assert h[2] == pytest.approx(0.9)


@pytest.mark.parametrize("linkage", LINKAGES)
def test_matches_rescan_oracle(rng, linkage):
    for _ in range(10):
        sim = random_sim(rng, 6)
        dist = np.maximum(1 - sim.values, 0)
        np.fill_diagonal(dist, 0)
        expected = oracles.agglomerate(dist.tolist(), linkage)
        got = as_tuples(cluster(sim, linkage))
        assert [(a, b) for a, b, _ in got] == [(a, b) for a, b, _ in expected]
        np.testing.assert_allclose([h for *_, h in got], [h for *_, h in expected], atol=1e-12)


@pytest.mark.parametrize("linkage", LINKAGES)
def test_tie_break_on_quantised_input(rng, linkage):
    # dyadic values keep all sums exact, so genuine ties occur
    for _ in range(20):
        sim = random_sim(rng, 7, quantum=0.25)
        dist = np.maximum(1 - sim.values, 0)
        np.fill_diagonal(dist, 0)
        expected = oracles.agglomerate(dist.tolist(), linkage)
        assert as_tuples(cluster(sim, linkage)) == expected


def test_all_equal_similarities_tie_break():
    v = np.full((4, 4), 0.5)
    np.fill_diagonal(v, 1.0)
    dend = cluster(SimilarityMatrix(list("abcd"), v))
    assert [(m.left, m.right) for m in dend.merges] == [(0, 1), (2, 3), (4, 5)]
    assert dend.tie_break == "lexicographic-min-node-pair"


def test_average_heights_monotone(rng):
    for _ in range(20):
        dend = cluster(random_sim(rng, 8), "average")
        h = [m.height for m in dend.merges]
        assert all(b >= a - 1e-12 for a, b in zip(h, h[1:]))


def test_heights_agree_with_scipy(rng):
    # independent cross-check of heights only; scipy breaks ties differently
    from scipy.cluster.hierarchy import linkage as scipy_linkage
    from scipy.spatial.distance import squareform

    for method in LINKAGES:
        sim = random_sim(rng, 8)
        dist = np.maximum(1 - sim.values, 0)
        np.fill_diagonal(dist, 0)
        ref = scipy_linkage(squareform(dist, checks=False), method=method)
        got = [m.height for m in cluster(sim, method).merges]
        np.testing.assert_allclose(got, ref[:, 2], atol=1e-12)


def test_permutation_gives_isomorphic_tree(rng):
    sim = random_sim(rng, 7)
    perm = rng.permutation(7)
    permuted = SimilarityMatrix([sim.tasks[i] for i in perm], sim.values[np.ix_(perm, perm)])
    d1, d2 = cluster(sim), cluster(permuted)
    np.testing.assert_allclose([m.height for m in d1.merges], [m.height for m in d2.merges], atol=1e-12)
    for k in range(1, 8):
        c1, c2 = cut(d1, k), cut(d2, k)
        assert oracles.same_partition([c1[t] for t in sim.tasks], [c2[t] for t in sim.tasks])


def test_invalid_similarity_rejected():
    v = np.array([[1.0, 1.5], [1.5, 1.0]])
    with pytest.raises(InvalidSimilarity):
        cluster(TaskMatrix(["a", "b"], v))
    v = np.array([[1.0, 0.2, 0.1], [0.3, 1.0, 0.1], [0.1, 0.1, 1.0]])
    with pytest.raises(InvalidSimilarity):
        cluster(TaskMatrix(["a", "b", "c"], v))


def test_cut_extremes(rng):
    sim = random_sim(rng, 5)
    dend = cluster(sim)
    assert set(cut(dend, 1).values()) == {0}
    assert cut(dend, 5) == {t: i for i, t in enumerate(sim.tasks)}


def test_cut_recovers_blocks():
    sim = block_sim()
    labels = cut(cluster(sim), 2)
    assert labels == {"a": 0, "b": 0, "c": 1, "d": 1}
    dist = (1 - sim.values).tolist()
    assert oracles.same_partition(list(labels.values()), oracles.threshold_components(dist, 0.5))


@pytest.mark.parametrize("linkage", ["single"])
def test_single_linkage_cut_equals_threshold_components(rng, linkage):
    # for single linkage, cutting k clusters equals thresholding just below
    # the (k-1)-th highest merge
    for _ in range(20):
        sim = random_sim(rng, 8)
        dend = cluster(sim, linkage)
        dist = np.maximum(1 - sim.values, 0).tolist()
        for k in range(2, 8):
            threshold = dend.merges[len(dend.merges) - k].height
            if threshold == dend.merges[len(dend.merges) - k + 1].height:
                continue
            expected = oracles.threshold_components(dist, threshold)
            got = cut(dend, k)
            assert oracles.same_partition([got[t] for t in sim.tasks], expected)


def test_cut_partitions_every_task(rng):
    sim = random_sim(rng, 9)
    dend = cluster(sim)
    for k in range(1, 10):
        labels = cut(dend, k)
        assert sorted(labels) == sorted(sim.tasks)
        assert sorted(set(labels.values())) == list(range(k))
        # labels numbered by first appearance
        seen = []
        for t in sim.tasks:
            if labels[t] not in seen:
                seen.append(labels[t])
        assert seen == list(range(k))


@pytest.mark.parametrize("k", [0, 6, -1, 2.5])
def test_cut_invalid_k(rng, k):
    with pytest.raises(InvalidK):
        cut(cluster(random_sim(rng, 5)), k)


def test_dendrogram_validation():
    Dendrogram(("a", "b", "c"), (Merge(0, 1, 0.2), Merge(2, 3, 0.5)))
    with pytest.raises(ValidationError):
        Dendrogram(("a", "b", "c"), (Merge(0, 1, 0.2),))
    with pytest.raises(ValidationError):
        Dendrogram(("a", "b", "c"), (Merge(0, 1, 0.2), Merge(0, 2, 0.5)))
    with pytest.raises(ValidationError):
        Dendrogram(("a", "b", "c"), (Merge(0, 1, 0.6), Merge(2, 3, 0.5)))
    with pytest.raises(ValidationError):
        Dendrogram(("a", "b", "c"), (Merge(0, 1, 0.2), Merge(2, 5, 0.5)))
