"""Turn images, price panels and directed count matrices into signed graphs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DataError, DegenerateImage, EmptyMatrix, LengthMismatch, NonPositivePrice, ZeroVarianceRow
from .graph import SignedGraph


@dataclass(frozen=True)
class ImageGraphParams:
    radius: float = 5.0
    b: float = 14.0

    def __post_init__(self):
        if self.radius <= 0 or self.b <= 0:
            raise DataError("radius and b must be positive")


@dataclass
class ImageGraph:
    graph: SignedGraph
    shape: tuple[int, int]
    metadata: dict = field(default_factory=dict)


def _neighbor_offsets(radius: float) -> list[tuple[int, int]]:
    """Half-plane of grid offsets within ``radius`` so each pair appears once."""
    r = int(np.floor(radius))
    out = []
    for dy in range(0, r + 1):
        for dx in range(-r, r + 1):
            if dy == 0 and dx <= 0:
                continue
            if dy * dy + dx * dx <= radius * radius:
                out.append((dy, dx))
    return out


def image_to_graph(pixels, params: ImageGraphParams = ImageGraphParams()) -> ImageGraph:
    """Pixel-affinity graph: nodes are pixels in row-major order.

    Pixels within Euclidean grid distance ``radius`` are linked. Their RGB
    distances are z-scored over all linked pairs (sample sd) and mapped through
    ``exp(-b * z)``; weights above 1 are kept as is.
    """
    img = np.asarray(pixels, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    h, w = img.shape[:2]
    if h * w < 2:
        raise DataError("image needs at least two pixels")
    idx = np.arange(h * w).reshape(h, w)
    rows, cols, diffs = [], [], []
    for dy, dx in _neighbor_offsets(params.radius):
        y0, y1 = 0, h - dy
        x0, x1 = max(0, -dx), min(w, w - dx)
        if y1 <= y0 or x1 <= x0:
            continue
        a = img[y0:y1, x0:x1]
        b = img[y0 + dy : y1 + dy, x0 + dx : x1 + dx]
        rows.append(idx[y0:y1, x0:x1].ravel())
        cols.append(idx[y0 + dy : y1 + dy, x0 + dx : x1 + dx].ravel())
        diffs.append(np.linalg.norm(a - b, axis=2).ravel())
    if not rows:
        raise DataError("no pixel pairs within radius")
    rows, cols, diffs = np.concatenate(rows), np.concatenate(cols), np.concatenate(diffs)
    sd = diffs.std(ddof=1) if diffs.size > 1 else 0.0
    if not sd > 0:
        raise DegenerateImage("all candidate colour differences are equal")
    z = (diffs - diffs.mean()) / sd
    weights = np.exp(-params.b * z)
    lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
    meta = {
        "radius": params.radius,
        "b": params.b,
        "zscore": "sample sd over candidate edges",
        "diff_mean": float(diffs.mean()),
        "diff_sd": float(sd),
        "max_weight": float(weights.max()),
    }
    return ImageGraph(SignedGraph(h * w, lo, hi, weights), (h, w), meta)


def log_returns(prices) -> np.ndarray:
    """``log(P[:, t] / P[:, t-1])`` for an ``n x T`` price panel."""
    p = np.asarray(prices, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] < 2:
        raise DataError("prices must be an n x T matrix with T >= 2")
    bad = np.argwhere(~(p > 0))
    if bad.size:
        i, t = bad[0]
        raise NonPositivePrice(int(i), int(t))
    return np.diff(np.log(p), axis=1)


def excess_returns(returns, market_row) -> np.ndarray:
    r = np.asarray(returns, dtype=np.float64)
    m = np.asarray(market_row, dtype=np.float64).ravel()
    if r.shape[-1] != m.size:
        raise LengthMismatch(f"returns have {r.shape[-1]} periods, market has {m.size}")
    return r - m


def pearson_correlation_graph(returns) -> SignedGraph:
    """Complete signed graph weighted by pairwise Pearson correlation."""
    r = np.asarray(returns, dtype=np.float64)
    centered = r - r.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroVarianceRow(int(zero[0]))
    unit = centered / norms[:, None]
    corr = np.clip(unit @ unit.T, -1.0, 1.0)
    n = r.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    w = corr[iu, ju]
    keep = w != 0
    return SignedGraph(n, iu[keep], ju[keep], w[keep])


def symmetrize_center(counts) -> SignedGraph:
    """``M + M^T`` with the median nonzero pair weight subtracted from nonzero pairs."""
    m = sp.csr_matrix(counts, dtype=np.float64)
    if m.shape[0] != m.shape[1]:
        raise DataError("count matrix must be square")
    if np.any(m.diagonal() != 0):
        raise DataError("count matrix must have zero diagonal")
    sym = sp.triu(m + m.T, k=1).tocoo()
    keep = sym.data != 0
    rows, cols, vals = sym.row[keep], sym.col[keep], sym.data[keep]
    if vals.size == 0:
        raise EmptyMatrix("no nonzero pairs")
    centered = vals - np.median(vals)
    nz = centered != 0
    return SignedGraph(m.shape[0], rows[nz], cols[nz], centered[nz])
