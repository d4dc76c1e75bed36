import numpy as np
import pytest

from signed_mbo import BaParams, SsbmParams, ground_truth, signed_ba, ssbm
from signed_mbo.errors import DataError
from signed_mbo.generators import ba_skeleton, equal_sizes


class TestGroundTruth:
    def test_labels(self):
        np.testing.assert_array_equal(ground_truth((2, 2)).labels, [0, 0, 1, 1])

    def test_single_cluster(self):
        s = ground_truth((3,)).sign_matrix()
        np.testing.assert_array_equal(s, np.ones((3, 3)) - np.eye(3))

    def test_two_singletons(self):
        assert ground_truth((1, 1)).sign_matrix()[0, 1] == -1

    def test_one_hot_rows(self):
        u = ground_truth((3, 1, 2)).one_hot
        np.testing.assert_array_equal(u.sum(axis=0), [3, 1, 2])

    def test_equal_sizes(self):
        assert equal_sizes(1200, 5) == [240] * 5


class TestSsbm:
    def test_full_no_noise_is_sign_matrix(self):
        g, truth = ssbm(SsbmParams((4, 3, 5), 1.0, 0.0, seed=1))
        np.testing.assert_array_equal(g.adjacency().toarray(), truth.sign_matrix())

    def test_full_all_noise_is_negated(self):
        g, truth = ssbm(SsbmParams((4, 3, 5), 1.0, 1.0, seed=1))
        np.testing.assert_array_equal(g.adjacency().toarray(), -truth.sign_matrix())

    def test_edge_count_binomial(self):
        v, lam = 1200, 0.05
        g, _ = ssbm(SsbmParams(tuple(equal_sizes(v, 5)), lam, 0.2, seed=4))
        n = v * (v - 1) / 2
        assert abs(g.edge_count - lam * n) <= 3 * np.sqrt(n * lam * (1 - lam))

    def test_flip_rate_binomial(self):
        eta = 0.3
        g, truth = ssbm(SsbmParams(tuple(equal_sizes(1200, 5)), 0.05, eta, seed=5))
        flipped = np.sign(g.weights) != truth.sign(g.rows, g.cols)
        n = g.edge_count
        assert abs(flipped.mean() - eta) <= 3 * np.sqrt(eta * (1 - eta) / n)

    def test_seeded(self):
        p = SsbmParams((30, 30), 0.2, 0.1, seed=8)
        assert ssbm(p)[0] == ssbm(p)[0]
        assert ssbm(p)[0] != ssbm(SsbmParams((30, 30), 0.2, 0.1, seed=9))[0]

    def test_no_isolated_nodes(self):
        g, _ = ssbm(SsbmParams((50, 50), 0.05, 0.1, seed=0))
        assert np.all(np.bincount(np.r_[g.rows, g.cols], minlength=100) > 0)

    @pytest.mark.parametrize("sparsity,noise", [(0.0, 0.1), (1.5, 0.1), (0.5, -0.1)])
    def test_rejects_bad_probabilities(self, sparsity, noise):
        with pytest.raises(DataError):
            SsbmParams((5, 5), sparsity, noise)


class TestBarabasiAlbert:
    def test_edge_count(self):
        v, v0, nu = 300, 6, 3
        g, _ = signed_ba(BaParams(tuple(equal_sizes(v, 3)), v0, nu, 0.2, seed=2))
        assert g.edge_count == v0 * (v0 - 1) // 2 + nu * (v - v0)

    def test_no_noise_signs(self):
        g, truth = signed_ba(BaParams((40, 40, 40), 5, 2, 0.0, seed=3))
        np.testing.assert_array_equal(g.weights, truth.sign(g.rows, g.cols))

    def test_skeleton_has_no_duplicates(self):
        rows, cols = ba_skeleton(500, 5, 4, np.random.default_rng(0))
        pairs = set(zip(rows.tolist(), cols.tolist()))
        assert len(pairs) == rows.size

    def test_rejects_nu_above_v0(self):
        with pytest.raises(DataError):
            BaParams((10, 10), 3, 4, 0.1)

    def test_tail_heavier_than_erdos_renyi(self):
        v, v0, nu = 2000, 5, 3
        rng = np.random.default_rng(0)
        ba_tail = er_tail = 0
        for seed in range(50):
            rows, cols = ba_skeleton(v, v0, nu, np.random.default_rng(seed))
            deg = np.bincount(np.r_[rows, cols], minlength=v)
            ba_tail += np.count_nonzero(deg >= 5 * nu)
            p = rows.size / (v * (v - 1) / 2)
            er_deg = rng.binomial(v - 1, p, size=v)
            er_tail += np.count_nonzero(er_deg >= 5 * nu)
        assert ba_tail > er_tail
