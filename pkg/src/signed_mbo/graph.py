"""Signed graphs, their sign decomposition, degrees and Laplacians."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DataError, DimensionMismatch, IsolatedNode


@dataclass(frozen=True, eq=False)
class SignedGraph:
    """Undirected weighted graph with real (possibly negative) weights.

    Edges are stored once, in upper-triangular coordinate form (``rows < cols``),
    sorted lexicographically. Self-loops and explicit zeros are rejected.
    """

    node_count: int
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        if self.node_count < 1:
            raise DataError("node_count must be positive")
        if not (rows.size == cols.size == weights.size):
            raise DimensionMismatch("rows, cols and weights differ in length")
        if rows.size:
            if np.any(rows == cols):
                raise DataError("self-loops are not allowed")
            if np.any(rows > cols):
                raise DataError("edges must be stored with i < j")
            if rows.min() < 0 or cols.max() >= self.node_count:
                raise DataError("edge endpoint out of range")
            if np.any(weights == 0.0):
                raise DataError("explicit zero weights are not allowed")
            if not np.all(np.isfinite(weights)):
                raise DataError("weights must be finite")
            order = np.lexsort((cols, rows))
            rows, cols, weights = rows[order], cols[order], weights[order]
            key = rows * self.node_count + cols
            if np.any(key[1:] == key[:-1]):
                raise DataError("duplicate edges")
        for name, arr in (("rows", rows), ("cols", cols), ("weights", weights)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_edges(cls, node_count: int, edges) -> SignedGraph:
        """Build from an iterable of ``(i, j, w)`` triples with ``i != j``.

        Pairs given as ``(j, i)`` are flipped. Zero weights are skipped.
        """
        edges = list(edges)
        if not edges:
            return cls.empty(node_count)
        arr = np.array(edges, dtype=np.float64).reshape(-1, 3)
        i = arr[:, 0].astype(np.int64)
        j = arr[:, 1].astype(np.int64)
        w = arr[:, 2]
        keep = w != 0.0
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        return cls(node_count, lo[keep], hi[keep], w[keep])

    @classmethod
    def from_matrix(cls, matrix, *, check_symmetric: bool = True) -> SignedGraph:
        """Build from a dense or sparse symmetric matrix with zero diagonal."""
        m = sp.coo_matrix(matrix, dtype=np.float64)
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"matrix is not square: {m.shape}")
        csr = m.tocsr()
        csr.sum_duplicates()
        if check_symmetric and abs(csr - csr.T).max() > 0:
            raise DataError("matrix is not symmetric")
        if np.any(csr.diagonal() != 0):
            raise DataError("self-loops are not allowed")
        upper = sp.triu(csr, k=1).tocoo()
        keep = upper.data != 0
        return cls(m.shape[0], upper.row[keep], upper.col[keep], upper.data[keep])

    @classmethod
    def empty(cls, node_count: int) -> SignedGraph:
        z = np.zeros(0, dtype=np.int64)
        return cls(node_count, z, z, np.zeros(0))

    @property
    def edge_count(self) -> int:
        return int(self.weights.size)

    def adjacency(self) -> sp.csr_matrix:
        """Full symmetric adjacency matrix ``A`` in CSR form."""
        n = self.node_count
        r = np.concatenate([self.rows, self.cols])
        c = np.concatenate([self.cols, self.rows])
        w = np.concatenate([self.weights, self.weights])
        return sp.csr_matrix((w, (r, c)), shape=(n, n))

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.weights.tolist()))

    def __eq__(self, other):
        if not isinstance(other, SignedGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def __repr__(self):
        return f"SignedGraph(node_count={self.node_count}, edge_count={self.edge_count})"


@dataclass(frozen=True)
class DegreeMatrices:
    """Diagonals of the signed degree matrix and of its two parts."""

    d_bar: np.ndarray
    d_plus: np.ndarray
    d_minus: np.ndarray


class LaplacianKind(enum.Enum):
    SIGNED = "signed"
    SIGNED_RANDOM_WALK = "signed_rw"
    SIGNED_SYMMETRIC = "signed_sym"
    POSITIVE_PART = "positive"
    SIGNLESS = "signless"
    UNSIGNED_COMBINATORIAL = "unsigned"

    @property
    def normalized(self) -> bool:
        return self in (LaplacianKind.SIGNED_RANDOM_WALK, LaplacianKind.SIGNED_SYMMETRIC)

    @property
    def symmetric(self) -> bool:
        return self is not LaplacianKind.SIGNED_RANDOM_WALK


@dataclass(frozen=True, eq=False)
class LaplacianOperator:
    kind: LaplacianKind
    matrix: sp.csr_matrix
    degrees: DegreeMatrices

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def decompose(graph: SignedGraph) -> tuple[SignedGraph, SignedGraph]:
    """Split into positive part ``max(A, 0)`` and negative part ``-min(A, 0)``."""
    n = graph.node_count
    pos = graph.weights > 0
    neg = ~pos
    return (
        SignedGraph(n, graph.rows[pos], graph.cols[pos], graph.weights[pos]),
        SignedGraph(n, graph.rows[neg], graph.cols[neg], -graph.weights[neg]),
    )


def _row_sums(m: sp.spmatrix) -> np.ndarray:
    return np.asarray(m.sum(axis=1)).ravel()


def degrees(graph: SignedGraph) -> DegreeMatrices:
    pos, neg = decompose(graph)
    d_plus = _row_sums(pos.adjacency())
    d_minus = _row_sums(neg.adjacency())
    return DegreeMatrices(d_bar=d_plus + d_minus, d_plus=d_plus, d_minus=d_minus)


def _check_part(m, n: int, name: str) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=np.float64)
    if m.shape != (n, n):
        raise DimensionMismatch(f"{name} has shape {m.shape}, expected {(n, n)}")
    if m.nnz and m.data.min() < 0:
        raise DataError(f"{name} must be nonnegative")
    return m


def laplacian_from_parts(pos, neg, kind: LaplacianKind) -> LaplacianOperator:
    """Assemble a Laplacian from separate nonnegative attraction/repulsion matrices.

    Unlike :func:`build_laplacian`, overlapping positive and negative weights on
    the same pair are kept apart, so both contribute to the degrees. This is the
    form needed once must-links and cannot-links are stacked on top of a graph.
    """
    n = pos.shape[0]
    a_plus = _check_part(pos, n, "positive part")
    a_minus = _check_part(neg, n, "negative part")
    d_plus = _row_sums(a_plus)
    d_minus = _row_sums(a_minus)
    degs = DegreeMatrices(d_bar=d_plus + d_minus, d_plus=d_plus, d_minus=d_minus)

    if kind is LaplacianKind.POSITIVE_PART:
        mat = sp.diags(d_plus) - a_plus
    elif kind is LaplacianKind.SIGNLESS:
        mat = sp.diags(d_minus) + a_minus
    elif kind is LaplacianKind.UNSIGNED_COMBINATORIAL:
        a = a_plus - a_minus
        mat = sp.diags(_row_sums(a)) - a
    else:
        a = a_plus - a_minus
        mat = sp.diags(degs.d_bar) - a
        if kind.normalized:
            zero = np.flatnonzero(degs.d_bar <= 0)
            if zero.size:
                raise IsolatedNode(int(zero[0]))
            if kind is LaplacianKind.SIGNED_SYMMETRIC:
                s = sp.diags(1.0 / np.sqrt(degs.d_bar))
                mat = sp.identity(n) - s @ a @ s
            else:
                mat = sp.identity(n) - sp.diags(1.0 / degs.d_bar) @ a
    mat = sp.csr_matrix(mat)
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return LaplacianOperator(kind=kind, matrix=mat, degrees=degs)


def build_laplacian(graph: SignedGraph, kind: LaplacianKind) -> LaplacianOperator:
    pos, neg = decompose(graph)
    return laplacian_from_parts(pos.adjacency(), neg.adjacency(), kind)


def quadratic_form(op: LaplacianOperator, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (op.size,):
        raise DimensionMismatch(f"vector has shape {x.shape}, expected ({op.size},)")
    return float(x @ (op.matrix @ x))


def to_pm(u: np.ndarray) -> np.ndarray:
    """Map a {0,1} characteristic matrix to its {-1,1} representation ``2U - 1``."""
    return 2.0 * np.asarray(u, dtype=np.float64) - 1.0


def signed_gl_energy(op: LaplacianOperator, u_pm, eps: float = 1.0) -> float:
    """Signed Ginzburg-Landau energy of a matrix in the {-1,1} representation.

    Dirichlet part ``(eps/8) <U, L U>`` plus the multi-well part
    ``(1/(2 eps)) sum_i prod_k (1/16) ||u_i - e_k^pm||_1^2``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    u = np.asarray(u_pm, dtype=np.float64)
    if u.ndim != 2 or u.shape[0] != op.size:
        raise DimensionMismatch(f"u_pm has shape {u.shape}, expected ({op.size}, K)")
    k = u.shape[1]
    dirichlet = float(np.sum(u * (op.matrix @ u)))
    # ||u_i - e_k^pm||_1 = sum_j |u_ij + 1| - |u_ik + 1| + |u_ik - 1|
    plus = np.abs(u + 1.0)
    dist = plus.sum(axis=1, keepdims=True) - plus + np.abs(u - 1.0)
    well = np.prod(dist**2 / 16.0, axis=1).sum() if k else 0.0
    return eps / 8.0 * dirichlet + float(well) / (2.0 * eps)
