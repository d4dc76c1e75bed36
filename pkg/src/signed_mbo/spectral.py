"""Partial eigendecompositions of graph Laplacians.

Small problems go through a dense symmetric eigensolve. Larger ones use a
block Lanczos iteration with full reorthogonalization and Rayleigh-Ritz
extraction, stopped once every requested pair meets the residual tolerance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import AllZeroSpectrum, DataError, NoConvergence
from .graph import LaplacianKind, LaplacianOperator

DENSE_THRESHOLD = 512


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """The ``m`` algebraically smallest eigenpairs of a Laplacian.

    ``eigenvectors`` are right eigenvectors. ``dual`` holds the matching left
    vectors, normalized so that ``dual.T @ eigenvectors == I``; for symmetric
    kinds it is the same array as ``eigenvectors``. The reduced propagator is
    ``eigenvectors @ diag(f(eigenvalues)) @ dual.T``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source_kind: LaplacianKind
    dual: np.ndarray

    @property
    def m(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def size(self) -> int:
        return int(self.eigenvectors.shape[0])


def _fix_signs(x: np.ndarray) -> np.ndarray:
    """Flip columns so their first non-negligible component is positive."""
    x = np.array(x, dtype=np.float64)
    for j in range(x.shape[1]):
        col = x[:, j]
        scale = np.max(np.abs(col))
        if scale == 0:
            continue
        first = np.flatnonzero(np.abs(col) > 1e-10 * scale)[0]
        if col[first] < 0:
            x[:, j] = -col
    return x


def _orthonormalize(block: np.ndarray, basis: np.ndarray | None, rng, drop_tol=1e-10):
    """Orthonormalize ``block`` against ``basis`` and itself.

    Columns that collapse (the Krylov space became invariant) are replaced by
    fresh random directions so the iteration keeps growing.
    """
    n, b = block.shape
    out = block.copy()
    norms0 = np.linalg.norm(out, axis=0)
    for _ in range(2):
        if basis is not None and basis.shape[1]:
            out -= basis @ (basis.T @ out)
    q, r = np.linalg.qr(out)
    diag = np.abs(np.diag(r))
    ref = max(float(norms0.max(initial=0.0)), 1.0)
    bad = diag <= drop_tol * ref
    if np.any(bad):
        # TODO(perf): rank-revealing QR would avoid re-orthonormalizing the whole block
        fresh = rng.standard_normal((n, int(bad.sum())))
        out[:, bad] = fresh
        for _ in range(2):
            if basis is not None and basis.shape[1]:
                out -= basis @ (basis.T @ out)
        q, r = np.linalg.qr(out)
    return q


def _lanczos(matrix, m: int, tol: float, rng, max_dim: int, block_size: int):
    n = matrix.shape[0]
    b = max(1, min(block_size, n))
    cap = min(n, max(max_dim, m))
    capacity = min(n, max(8 * b, 64))
    q_all = np.zeros((n, capacity))
    aq_all = np.zeros((n, capacity))
    h = np.zeros((capacity, capacity))
    dim = 0

    block = _orthonormalize(rng.standard_normal((n, b)), None, rng)
    next_check = max(m + b, 2 * m)
    iterations = 0
    while True:
        iterations += 1
        take = min(block.shape[1], cap - dim)
        block = block[:, :take]
        w = np.asarray(matrix @ block)
        if dim + take > capacity:
            capacity = min(n, max(2 * capacity, dim + take))
            q_all = np.pad(q_all, ((0, 0), (0, capacity - q_all.shape[1])))
            aq_all = np.pad(aq_all, ((0, 0), (0, capacity - aq_all.shape[1])))
            h = np.pad(h, ((0, capacity - h.shape[0]), (0, capacity - h.shape[1])))
        q_all[:, dim : dim + take] = block
        aq_all[:, dim : dim + take] = w
        cross = q_all[:, : dim + take].T @ w
        h[: dim + take, dim : dim + take] = cross
        h[dim : dim + take, : dim + take] = cross.T
        dim += take

        if dim >= next_check or dim >= cap:
            hs = h[:dim, :dim]
            theta, y = np.linalg.eigh(0.5 * (hs + hs.T))
            theta, y = theta[:m], y[:, :m]
            vecs = q_all[:, :dim] @ y
            resid = aq_all[:, :dim] @ y - vecs * theta
            rnorm = np.linalg.norm(resid, axis=0)
            if np.all(rnorm <= tol * np.maximum(1.0, np.abs(theta))):
                return theta, vecs
            if dim >= cap:
                if cap == n:
                    # full space spanned: Rayleigh-Ritz is exact up to rounding
                    return theta, vecs
                raise NoConvergence(iterations)
            next_check = dim + max(b, dim // 4)

        block = _orthonormalize(w, q_all[:, :dim], rng)


def smallest_eigenpairs(
    op: LaplacianOperator,
    m: int,
    tol: float = 1e-10,
    *,
    seed=0,
    dense_threshold: int = DENSE_THRESHOLD,
    max_dim: int | None = None,
    block_size: int | None = None,
) -> SpectralBasis:
    """Compute the ``m`` smallest eigenpairs of ``op.matrix``.

    The random-walk kind is solved through its symmetric similar matrix and the
    eigenvectors are mapped back with ``D^{-1/2}``.
    """
    n = op.size
    if not 1 <= m <= n:
        raise DataError(f"m={m} must lie in [1, {n}]")
    rng = np.random.default_rng(seed)

    if op.kind is LaplacianKind.SIGNED_RANDOM_WALK:
        s = np.sqrt(op.degrees.d_bar)
        mat = sp.diags(s) @ op.matrix @ sp.diags(1.0 / s)
    else:
        mat = op.matrix
    mat = sp.csr_matrix(0.5 * (mat + mat.T))

    if n <= dense_threshold:
        vals, vecs = np.linalg.eigh(mat.toarray())
        vals, vecs = vals[:m], vecs[:, :m]
    else:
        vals, vecs = _lanczos(
            mat,
            m,
            tol,
            rng,
            max_dim=n if max_dim is None else max_dim,
            block_size=m if block_size is None else block_size,
        )
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], _fix_signs(vecs[:, order])

    if op.kind is LaplacianKind.SIGNED_RANDOM_WALK:
        right = vecs / s[:, None]
        left = vecs * s[:, None]
        return SpectralBasis(vals, right, op.kind, left)
    return SpectralBasis(vals, vecs, op.kind, vecs)


def bottom_nonzero_eigenvector(
    basis: SpectralBasis,
    zero_tol: float | None = None,
    *,
    rng=None,
    multiplicity_tol: float = 1e-8,
) -> np.ndarray:
    """Eigenvector of the smallest eigenvalue exceeding ``zero_tol``.

    If that eigenvalue is repeated (within ``multiplicity_tol``, relative), a
    random unit vector of its eigenspace is returned instead.
    """
    vals = basis.eigenvalues
    if zero_tol is None:
        zero_tol = 1e-8 * max(float(np.max(vals)), 0.0)
    idx = np.flatnonzero(vals > zero_tol)
    if idx.size == 0:
        raise AllZeroSpectrum(f"no eigenvalue above {zero_tol:g}")
    lam = vals[idx[0]]
    group = idx[np.abs(vals[idx] - lam) <= multiplicity_tol * max(1.0, abs(lam))]
    if group.size == 1:
        return basis.eigenvectors[:, group[0]].copy()
    rng = np.random.default_rng(rng)
    coeffs = rng.standard_normal(group.size)
    vec = basis.eigenvectors[:, group] @ coeffs
    return vec / np.linalg.norm(vec)


def dump_basis_csv(basis: SpectralBasis, path) -> None:
    """Write eigenvalues as the header row and eigenvectors below, one node per row."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node"] + [repr(float(v)) for v in basis.eigenvalues])
        for i, row in enumerate(basis.eigenvectors):
            writer.writerow([i] + [repr(float(v)) for v in row])
