import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from signed_mbo import SignedGraph, SsbmParams, ari, bnc_objective, kmeans_pp, ssbm
from signed_mbo.errors import EmptyCluster, LengthMismatch
from signed_mbo.metrics import bratio_objective, contingency_table


class TestAri:
    def test_identical(self):
        assert ari([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == 1.0

    def test_worked_case(self):
        assert ari([1, 1, 2, 2], [1, 1, 1, 2]) == 0.0

    def test_contingency(self):
        t = contingency_table([1, 1, 2, 2], [1, 1, 1, 2])
        np.testing.assert_array_equal(t.counts, [[2, 0], [1, 1]])

    def test_relabeling(self, rng):
        truth = rng.integers(0, 5, 200)
        perm = rng.permutation(5)
        assert ari(perm[truth], truth) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            ari([0, 1], [0, 1, 1])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 4), min_size=2, max_size=60), st.integers(0, 2**32 - 1))
    def test_matches_sklearn_and_is_symmetric(self, a, seed):
        b = np.random.default_rng(seed).integers(0, 4, len(a))
        assert ari(a, b) == pytest.approx(adjusted_rand_score(a, b), abs=1e-12)
        assert ari(a, b) == ari(b, a)

    def test_random_partitions_average_zero(self):
        r = np.random.default_rng(0)
        vals = [ari(r.integers(0, 5, 300), r.integers(0, 5, 300)) for _ in range(500)]
        assert abs(np.mean(vals)) <= 0.02


def bnc_dense(assign, a, k):
    """Block-matrix evaluation with explicit indicator vectors."""
    d_plus = np.diag(np.maximum(a, 0).sum(axis=1))
    d_bar = np.diag(np.abs(a).sum(axis=1))
    total = 0.0
    for c in range(k):
        x = (np.asarray(assign) == c).astype(float)
        total += x @ (d_plus - a) @ x / (x @ d_bar @ x)
    return total


class TestBnc:
    def test_ground_truth_matches_dense(self):
        g, truth = ssbm(SsbmParams((10, 10, 10), 1.0, 0.0, seed=0))
        a = g.adjacency().toarray()
        assert bnc_objective(truth.labels, g) == pytest.approx(bnc_dense(truth.labels, a, 3), rel=1e-12)

    def test_single_cluster_positive_graph(self):
        g = SignedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 2.0)])
        assert bnc_objective([0, 0, 0], g) == 0.0

    def test_random_partition_matches_dense(self, rng):
        g, _ = ssbm(SsbmParams((15, 15), 0.4, 0.2, seed=3))
        assign = rng.integers(0, 3, 30)
        expect = bnc_dense(assign, g.adjacency().toarray(), 3)
        assert bnc_objective(assign, g, 3) == pytest.approx(expect, rel=1e-12)

    def test_ground_truth_is_brute_force_minimum(self):
        g, truth = ssbm(SsbmParams((4, 4), 1.0, 0.0, seed=0))
        best = min(
            bnc_objective(np.array(bits), g, 2)
            for bits in itertools.product((0, 1), repeat=8)
            if 0 < sum(bits) < 8
        )
        assert bnc_objective(truth.labels, g) == pytest.approx(best)

    def test_empty_cluster(self):
        g = SignedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, -1.0)])
        with pytest.raises(EmptyCluster):
            bnc_objective([0, 0, 2], g)

    def test_ratio_cut_uses_sizes(self):
        g = SignedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
        # cluster {0,1}: cut 1 over size 2; cluster {2}: cut 1 over size 1
        assert bratio_objective([0, 0, 1], g) == pytest.approx(1.5)


class TestKmeans:
    def test_separated_clouds(self, rng):
        centers = np.array([[0, 0], [100, 0], [0, 100]], dtype=float)
        labels = np.repeat(np.arange(3), 20)
        pts = centers[labels] + rng.uniform(-1, 1, (60, 2))
        assert ari(kmeans_pp(pts, 3, seed=0), labels) == 1.0

    def test_k_equals_v(self, rng):
        pts = rng.standard_normal((6, 2))
        assert len(set(kmeans_pp(pts, 6).tolist())) == 6

    def test_blobs_over_seeds(self):
        r = np.random.default_rng(1)
        labels = np.repeat([0, 1], 100)
        pts = np.array([[0.0, 0.0], [5.0, 0.0]])[labels] + 0.1 * r.standard_normal((200, 2))
        assert all(ari(kmeans_pp(pts, 2, seed=s), labels) == 1.0 for s in range(20))

    def test_deterministic(self, rng):
        pts = rng.standard_normal((100, 3))
        np.testing.assert_array_equal(kmeans_pp(pts, 4, seed=3), kmeans_pp(pts, 4, seed=3))
