import numpy as np
import pytest

from signed_mbo import LaplacianKind, SignedGraph, SsbmParams, build_laplacian, smallest_eigenpairs, ssbm
from signed_mbo.errors import AllZeroSpectrum, DataError
from signed_mbo.spectral import SpectralBasis, bottom_nonzero_eigenvector, dump_basis_csv

from conftest import connected_signed_graph


def lanczos(op, m, **kw):
    return smallest_eigenpairs(op, m, dense_threshold=0, **kw)


class TestSmallEigenproblems:
    @pytest.mark.parametrize("w", [1.0, -1.0])
    def test_two_nodes(self, w):
        op = build_laplacian(SignedGraph.from_edges(2, [(0, 1, w)]), LaplacianKind.SIGNED)
        basis = smallest_eigenpairs(op, 2)
        np.testing.assert_allclose(basis.eigenvalues, [0, 2], atol=1e-12)

    def test_m_out_of_range(self):
        op = build_laplacian(SignedGraph.from_edges(2, [(0, 1, 1.0)]), LaplacianKind.SIGNED)
        with pytest.raises(DataError):
            smallest_eigenpairs(op, 3)


class TestLanczosAgainstDense:
    def test_ssbm_200(self):
        g, _ = ssbm(SsbmParams((50, 50, 50, 50), 0.2, 0.1, seed=3))
        op = build_laplacian(g, LaplacianKind.SIGNED_SYMMETRIC)
        oracle = np.linalg.eigvalsh(op.matrix.toarray())[:5]
        np.testing.assert_allclose(lanczos(op, 5).eigenvalues, oracle, atol=1e-8)

    @pytest.mark.parametrize(
        "kind", [LaplacianKind.SIGNED, LaplacianKind.SIGNED_SYMMETRIC, LaplacianKind.SIGNLESS]
    )
    def test_random_graphs(self, kind, rng):
        for _ in range(3):
            op = build_laplacian(connected_signed_graph(150, 0.05, rng), kind)
            basis = lanczos(op, 8)
            oracle = np.linalg.eigvalsh(op.matrix.toarray())[:8]
            np.testing.assert_allclose(basis.eigenvalues, oracle, atol=1e-8)

    def test_orthonormal_and_small_residual(self, rng):
        op = build_laplacian(connected_signed_graph(180, 0.05, rng), LaplacianKind.SIGNED_SYMMETRIC)
        b = lanczos(op, 6)
        x = b.eigenvectors
        np.testing.assert_allclose(x.T @ x, np.eye(6), atol=1e-10)
        resid = op.matrix @ x - x * b.eigenvalues
        assert np.linalg.norm(resid, axis=0).max() < 1e-8

    def test_random_walk_right_eigenvectors(self, rng):
        op = build_laplacian(connected_signed_graph(120, 0.05, rng), LaplacianKind.SIGNED_RANDOM_WALK)
        b = lanczos(op, 5)
        resid = op.matrix @ b.eigenvectors - b.eigenvectors * b.eigenvalues
        assert np.abs(resid).max() < 1e-8
        # dual vectors are biorthogonal to the right eigenvectors
        np.testing.assert_allclose(b.dual.T @ b.eigenvectors, np.eye(5), atol=1e-10)

    def test_deterministic(self, rng):
        op = build_laplacian(connected_signed_graph(150, 0.05, rng), LaplacianKind.SIGNED)
        a, b = lanczos(op, 5, seed=7), lanczos(op, 5, seed=7)
        np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
        np.testing.assert_array_equal(a.eigenvectors, b.eigenvectors)

    def test_sign_convention(self, rng):
        op = build_laplacian(connected_signed_graph(100, 0.05, rng), LaplacianKind.SIGNED)
        x = lanczos(op, 4).eigenvectors
        for col in x.T:
            first = col[np.flatnonzero(np.abs(col) > 1e-12)[0]]
            assert first > 0


def basis_of(vals, vecs=None):
    vals = np.asarray(vals, dtype=float)
    vecs = np.eye(vals.size) if vecs is None else vecs
    return SpectralBasis(vals, vecs, LaplacianKind.SIGNED, vecs)


class TestBottomNonzero:
    def test_skips_zero(self):
        np.testing.assert_array_equal(bottom_nonzero_eigenvector(basis_of([0, 2])), [0, 1])

    def test_strictly_positive_spectrum(self):
        np.testing.assert_array_equal(bottom_nonzero_eigenvector(basis_of([0.3, 0.8]), 1e-8), [1, 0])

    def test_degenerate_pair_stays_in_eigenspace(self):
        rng = np.random.default_rng(0)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        mat = q @ np.diag([0.0, 1.0, 1.0]) @ q.T
        vals, vecs = np.linalg.eigh(mat)
        vec = bottom_nonzero_eigenvector(basis_of(vals, vecs), rng=3)
        assert np.linalg.norm(mat @ vec - vec) <= 1e-8
        assert np.linalg.norm(vec) == pytest.approx(1.0)

    def test_all_zero(self):
        with pytest.raises(AllZeroSpectrum):
            bottom_nonzero_eigenvector(basis_of([0.0, 0.0]))


def test_dump_csv(tmp_path):
    b = basis_of([0.0, 2.0], np.array([[1.0, 0.0], [0.0, 1.0]]))
    path = tmp_path / "basis.csv"
    dump_basis_csv(b, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 3
