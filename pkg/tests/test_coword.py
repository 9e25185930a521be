import json
from itertools import combinations

import numpy as np
import pytest
from scipy.cluster.hierarchy import is_monotonic, is_valid_linkage

from core.coword import (
    HEIGHT_DECIMALS,
    CowordMatrix,
    cluster_frame,
    coword_matrix,
    dendrogram_text,
    distance_matrix,
    edge_list,
    hierarchical_cluster,
    merge_frame,
    to_linkage,
)
from core.errors import ClusteringError
from tests.conftest import stream


def random_corpus(rng, n_docs=30, vocab=10):
    words = [f"k{i:02d}" for i in range(vocab)]
    streams = [
        stream(str(d), rng.choice(words, size=int(rng.integers(1, 6)), replace=False).tolist())
        for d in range(n_docs)
    ]
    return streams, words


def naive_average_linkage(matrix: CowordMatrix):
    """Cubic reference: recompute every cluster-pair mean from leaf distances each round."""
    dist = distance_matrix(matrix)
    index = {t: i for i, t in enumerate(matrix.terms)}
    clusters = {t: [t] for t in matrix.terms}
    merges = []
    while len(clusters) > 1:
        best = None
        for a, b in combinations(sorted(clusters), 2):
            pairs = [dist[index[x], index[y]] for x in clusters[a] for y in clusters[b]]
            height = round(float(np.mean(pairs)), HEIGHT_DECIMALS)
            if best is None or (height, a, b) < best:
                best = (height, a, b)
        height, a, b = best
        clusters[a] = clusters[a] + clusters.pop(b)
        merges.append((a, b, height, len(clusters[a])))
    return merges


@pytest.fixture
def small_matrix():
    streams = [stream("1", ["a", "b"]), stream("2", ["b", "a", "a"]), stream("3", ["c"])]
    return coword_matrix(streams, ["a", "b", "c"])


class TestCowordMatrix:
    def test_counts_documents_not_occurrences(self, small_matrix):
        assert small_matrix.count("a", "b") == 2
        assert small_matrix.count("a", "a") == 2
        assert small_matrix.count("c", "c") == 1
        assert small_matrix.count("a", "c") == 0

    def test_matches_set_intersection(self):
        rng = np.random.default_rng(11)
        streams, words = random_corpus(rng)
        matrix = coword_matrix(streams, words)
        sets = [set(s.tokens) for s in streams]
        for a in words:
            for b in words:
                assert matrix.count(a, b) == sum(1 for s in sets if a in s and b in s)
        assert np.array_equal(matrix.counts, matrix.counts.T)
        assert all(matrix.counts[i, i] >= matrix.counts[i].max() for i in range(len(words)))

    def test_term_absent_everywhere(self):
        matrix = coword_matrix([stream("1", ["a"])], ["a", "z"])
        assert matrix.count("z", "z") == 0
        assert distance_matrix(matrix)[0, 1] == pytest.approx(1.0)

    def test_rejects_duplicate_or_empty_terms(self):
        with pytest.raises(ClusteringError):
            coword_matrix([stream("1", ["a"])], ["a", "a"])
        with pytest.raises(ClusteringError):
            coword_matrix([stream("1", ["a"])], [])

    def test_frame_and_edges(self, small_matrix):
        frame = small_matrix.to_frame()
        assert list(frame.columns) == ["term", "a", "b", "c"]
        edges = edge_list(small_matrix)
        assert edges.to_dict("records") == [{"source": "a", "target": "b", "weight": 2}]


class TestClustering:
    def test_small_example(self, small_matrix):
        result = hierarchical_cluster(small_matrix, k=2)
        merges = result.dendrogram.merges
        assert [(m.cluster_a, m.cluster_b, m.height, m.size) for m in merges] == [
            ("a", "b", 0.0, 2),
            ("a", "c", 1.0, 3),
        ]
        assert result.clusters == (("a", "b"), ("c",))
        assert json.loads(dendrogram_text(result.dendrogram)) == [["a", "b"], "c"]

    @pytest.mark.parametrize("n_docs, vocab, trials", [(25, 9, 5), (40, 20, 3)])
    def test_matches_naive_reference(self, n_docs, vocab, trials):
        rng = np.random.default_rng(12)
        for _ in range(trials):
            streams, words = random_corpus(rng, n_docs=n_docs, vocab=vocab)
            matrix = coword_matrix(streams, words)
            fast = hierarchical_cluster(matrix, k=1).dendrogram.merges
            slow = naive_average_linkage(matrix)
            assert [(m.cluster_a, m.cluster_b, m.size) for m in fast] == [(a, b, s) for a, b, _, s in slow]
            for m, (_, _, height, _) in zip(fast, slow):
                assert m.height == pytest.approx(height, abs=1e-9)

    def test_heights_non_decreasing(self):
        rng = np.random.default_rng(13)
        streams, words = random_corpus(rng, n_docs=40, vocab=12)
        merges = hierarchical_cluster(coword_matrix(streams, words), k=3).dendrogram.merges
        heights = [m.height for m in merges]
        assert heights == sorted(heights)
        assert len(merges) == len(words) - 1

    @pytest.mark.parametrize("k", [1, 2, 4, 7])
    def test_cut_is_partition(self, k):
        rng = np.random.default_rng(14)
        streams, words = random_corpus(rng, n_docs=20, vocab=7)
        result = hierarchical_cluster(coword_matrix(streams, words), k=k)
        assert len(result.clusters) == k
        members = [t for cluster in result.clusters for t in cluster]
        assert sorted(members) == sorted(words)
        assert [c[0] for c in result.clusters] == sorted(c[0] for c in result.clusters)

    def test_independent_of_term_order(self):
        rng = np.random.default_rng(15)
        streams, words = random_corpus(rng, n_docs=30, vocab=10)
        shuffled = [str(w) for w in rng.permutation(words)]
        first = hierarchical_cluster(coword_matrix(streams, words), k=3)
        second = hierarchical_cluster(coword_matrix(streams, shuffled), k=3)
        assert first.clusters == second.clusters
        assert [(m.cluster_a, m.cluster_b) for m in first.dendrogram.merges] == [
            (m.cluster_a, m.cluster_b) for m in second.dendrogram.merges
        ]

    def test_single_term(self):
        matrix = coword_matrix([stream("1", ["a"])], ["a"])
        result = hierarchical_cluster(matrix, k=1)
        assert result.clusters == (("a",),)
        assert result.dendrogram.merges == ()

    @pytest.mark.parametrize("k", [0, 4])
    def test_bad_k(self, small_matrix, k):
        with pytest.raises(ClusteringError):
            hierarchical_cluster(small_matrix, k=k)

    def test_linkage_is_valid_for_scipy(self):
        rng = np.random.default_rng(16)
        streams, words = random_corpus(rng, n_docs=30, vocab=8)
        tree = hierarchical_cluster(coword_matrix(streams, words), k=2).dendrogram
        linkage = to_linkage(tree)
        assert linkage.shape == (7, 4)
        assert is_valid_linkage(linkage)
        assert is_monotonic(linkage)

    def test_frames(self, small_matrix):
        result = hierarchical_cluster(small_matrix, k=2)
        merges = merge_frame(result.dendrogram)
        assert list(merges.columns) == ["step", "cluster_a", "cluster_b", "height", "size"]
        assert merges["step"].tolist() == [1, 2]
        clusters = cluster_frame(result.clusters)
        assert clusters.to_dict("records") == [
            {"term": "a", "cluster": 1},
            {"term": "b", "cluster": 1},
            {"term": "c", "cluster": 2},
        ]
