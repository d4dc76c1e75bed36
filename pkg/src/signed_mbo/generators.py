"""Seeded synthetic signed networks with planted clusters."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DataError
from .graph import SignedGraph

log = logging.getLogger(__name__)

MAX_REDRAWS = 10


@dataclass(frozen=True)
class GroundTruth:
    """Planted partition. Labels are 0-based cluster indices in block order."""

    labels: np.ndarray

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1

    @cached_property
    def one_hot(self) -> np.ndarray:
        u = np.zeros((self.labels.size, self.k))
        u[np.arange(self.labels.size), self.labels] = 1.0
        return u

    def sign(self, i, j):
        """Entries of the block sign matrix: +1 within a cluster, -1 across."""
        return np.where(self.labels[i] == self.labels[j], 1.0, -1.0)

    def sign_matrix(self) -> np.ndarray:
        s = np.where(self.labels[:, None] == self.labels[None, :], 1.0, -1.0)
        np.fill_diagonal(s, 0.0)
        return s


def ground_truth(cluster_sizes) -> GroundTruth:
    sizes = np.asarray(cluster_sizes, dtype=np.int64)
    if sizes.size == 0 or np.any(sizes < 1):
        raise DataError("cluster sizes must be positive")
    return GroundTruth(np.repeat(np.arange(sizes.size), sizes))


def equal_sizes(v: int, k: int) -> list[int]:
    """``k`` sizes summing to ``v``, differing by at most one."""
    base, extra = divmod(v, k)
    return [base + (1 if c < extra else 0) for c in range(k)]


@dataclass(frozen=True)
class SsbmParams:
    cluster_sizes: tuple[int, ...]
    sparsity: float
    noise: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.sparsity <= 1:
            raise DataError("sparsity must lie in (0, 1]")
        if not 0 <= self.noise <= 1:
            raise DataError("noise must lie in [0, 1]")
        if any(c < 1 for c in self.cluster_sizes):
            raise DataError("cluster sizes must be positive")


def _ssbm_draw(truth: GroundTruth, sparsity: float, noise: float, rng) -> SignedGraph:
    v = truth.labels.size
    rows, cols = np.triu_indices(v, k=1)
    draw = rng.random(rows.size)
    present = draw < sparsity
    flipped = draw < noise * sparsity
    rows, cols, flipped = rows[present], cols[present], flipped[present]
    w = truth.sign(rows, cols)
    w[flipped] = -w[flipped]
    return SignedGraph(v, rows, cols, w)


def _has_isolated(g: SignedGraph) -> bool:
    deg = np.bincount(g.rows, minlength=g.node_count) + np.bincount(g.cols, minlength=g.node_count)
    return bool(np.any(deg == 0))


def ssbm(params: SsbmParams) -> tuple[SignedGraph, GroundTruth]:
    """Signed stochastic block model.

    Each pair ``i < j`` independently carries the block sign with probability
    ``(1 - eta) * lambda``, the flipped sign with probability ``eta * lambda``,
    and no edge otherwise. Draws with an isolated node are redrawn from a
    fresh child seed (at most ``MAX_REDRAWS`` times).
    """
    truth = ground_truth(params.cluster_sizes)
    seeds = np.random.SeedSequence(params.seed).spawn(MAX_REDRAWS + 1)
    for attempt, child in enumerate(seeds):
        g = _ssbm_draw(truth, params.sparsity, params.noise, np.random.default_rng(child))
        if truth.labels.size == 1 or not _has_isolated(g):
            if attempt:
                log.info("ssbm: redrew %d time(s) to avoid isolated nodes", attempt)
            return g, truth
    raise DataError(f"ssbm produced isolated nodes in {MAX_REDRAWS + 1} draws")


@dataclass(frozen=True)
class BaParams:
    cluster_sizes: tuple[int, ...]
    v0: int
    nu: int
    noise: float
    seed: int = 0

    def __post_init__(self):
        v = sum(self.cluster_sizes)
        if not 1 <= self.nu <= self.v0:
            raise DataError("need 1 <= nu <= v0")
        if self.v0 > v:
            raise DataError("v0 exceeds node count")
        if not 0 <= self.noise <= 1:
            raise DataError("noise must lie in [0, 1]")


def ba_skeleton(v: int, v0: int, nu: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Preferential-attachment edge list grown from a ``v0``-clique.

    Each arriving node picks ``nu`` distinct targets one at a time, each with
    probability proportional to current degree among those not yet picked.
    """
    r0, c0 = np.triu_indices(v0, k=1)
    rows = [r0]
    cols = [c0]
    deg = np.zeros(v, dtype=np.float64)
    deg[:v0] = v0 - 1
    if v0 == 1:
        deg[0] = 1.0  # lone seed node still needs a nonzero attachment weight
    for new in range(v0, v):
        weights = deg[:new].copy()
        targets = np.empty(nu, dtype=np.int64)
        for t in range(nu):
            p = weights / weights.sum()
            pick = rng.choice(new, p=p)
            targets[t] = pick
            weights[pick] = 0.0
        rows.append(targets)
        cols.append(np.full(nu, new, dtype=np.int64))
        deg[targets] += 1
        deg[new] = nu
    return np.concatenate(rows), np.concatenate(cols)


def signed_ba(params: BaParams) -> tuple[SignedGraph, GroundTruth]:
    truth = ground_truth(params.cluster_sizes)
    v = truth.labels.size
    rng = np.random.default_rng(params.seed)
    rows, cols = ba_skeleton(v, params.v0, params.nu, rng)
    lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
    w = truth.sign(lo, hi)
    flip = rng.random(w.size) < params.noise
    w[flip] = -w[flip]
    return SignedGraph(v, lo, hi, w), truth
