"""Partition agreement, cut objectives and a k-means++ spectral baseline."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sklearn.cluster import KMeans

from .errors import EmptyCluster, IsolatedNode, LengthMismatch
from .graph import SignedGraph, decompose


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    total: int


def contingency_table(pred, truth) -> ContingencyTable:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise LengthMismatch(f"label vectors differ: {pred.shape} vs {truth.shape}")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    counts = np.zeros((p.max(initial=-1) + 1, t.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(counts, (p, t), 1)
    return ContingencyTable(counts, counts.sum(axis=1), counts.sum(axis=0), int(pred.size))


def _pairs(x) -> int:
    return sum(int(v) * (int(v) - 1) // 2 for v in np.ravel(x))


def ari(pred, truth) -> float:
    """Adjusted Rand index from the contingency table.

    Pair counts use exact integer/rational arithmetic; the result is converted
    to float only at the end. Two single-cluster (or all-singleton) partitions
    give 1.0 by convention.
    """
    table = contingency_table(pred, truth)
    index = _pairs(table.counts)
    sum_a = _pairs(table.row_sums)
    sum_b = _pairs(table.col_sums)
    total = _pairs([table.total])
    if total == 0:
        return 1.0
    expected = Fraction(sum_a * sum_b, total)
    maximum = Fraction(sum_a + sum_b, 2)
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


def _indicators(assign, k: int | None):
    assign = np.asarray(assign, dtype=np.int64)
    k = int(assign.max()) + 1 if k is None else k
    counts = np.bincount(assign, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyCluster(int(empty[0]))
    x = np.zeros((assign.size, k))
    x[np.arange(assign.size), assign] = 1.0
    return x


def bnc_objective(assign, graph: SignedGraph, k: int | None = None) -> float:
    """Balanced normalized cut: ``sum_c x_c^T (D+ - A) x_c / x_c^T D_bar x_c``."""
    if len(assign) != graph.node_count:
        raise LengthMismatch("assignment length differs from node count")
    x = _indicators(assign, k)
    pos, neg = decompose(graph)
    a = graph.adjacency()
    d_plus = np.asarray(pos.adjacency().sum(axis=1)).ravel()
    d_bar = d_plus + np.asarray(neg.adjacency().sum(axis=1)).ravel()
    zero = np.flatnonzero(d_bar == 0)
    if zero.size:
        raise IsolatedNode(int(zero[0]))
    num = np.einsum("ic,ic->c", x, d_plus[:, None] * x - a @ x)
    den = d_bar @ x
    return float(np.sum(num / den))


def bratio_objective(assign, graph: SignedGraph, k: int | None = None) -> float:
    """Balanced ratio cut: same numerator as BNC, cluster sizes as denominator."""
    if len(assign) != graph.node_count:
        raise LengthMismatch("assignment length differs from node count")
    x = _indicators(assign, k)
    pos, _ = decompose(graph)
    a = graph.adjacency()
    d_plus = np.asarray(pos.adjacency().sum(axis=1)).ravel()
    num = np.einsum("ic,ic->c", x, d_plus[:, None] * x - a @ x)
    return float(np.sum(num / x.sum(axis=0)))


def kmeans_pp(embedding, k: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    """Lloyd k-means with D^2 seeding; best of ``restarts`` by inertia."""
    x = np.asarray(embedding, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if k > x.shape[0]:
        raise ValueError(f"k={k} exceeds number of points {x.shape[0]}")
    km = KMeans(n_clusters=k, init="k-means++", n_init=restarts, random_state=seed)
    return km.fit_predict(x).astype(np.int64)
