"""File formats: Matrix Market graphs, label CSVs, price panels and PNG images.

Label files are 1-based on disk (``node_id,label`` with labels in 1..K) and
0-based in memory.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import DataError
from .graph import SignedGraph


def write_graph(path, graph: SignedGraph, provenance: str = "") -> None:
    comment = f" nodes={graph.node_count} provenance={provenance}".rstrip()
    upper = sp.coo_matrix(
        (graph.weights, (graph.cols, graph.rows)), shape=(graph.node_count, graph.node_count)
    )
    # lower-triangular storage is what the symmetric coordinate format expects
    scipy.io.mmwrite(str(path), upper, comment=comment, field="real", symmetry="symmetric")


def read_graph(path) -> SignedGraph:
    try:
        mat = scipy.io.mmread(str(path))
    except (ValueError, OSError) as exc:
        raise DataError(f"cannot read Matrix Market file {path}: {exc}") from exc
    return SignedGraph.from_matrix(sp.csr_matrix(mat))


def read_counts(path) -> sp.csr_matrix:
    """General (possibly asymmetric) Matrix Market count matrix."""
    try:
        return sp.csr_matrix(scipy.io.mmread(str(path)))
    except (ValueError, OSError) as exc:
        raise DataError(f"cannot read Matrix Market file {path}: {exc}") from exc


def write_labels(path, labels) -> None:
    labels = np.asarray(labels, dtype=np.int64)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_id", "label"])
        for i, lab in enumerate(labels):
            w.writerow([i, int(lab) + 1])


def read_labels(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise DataError(f"no labels in {path}")
    try:
        nodes = np.array([int(r["node_id"]) for r in rows])
        labels = np.array([int(r["label"]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise DataError(f"malformed label file {path}: {exc}") from exc
    if np.any(labels < 1):
        raise DataError("labels must be >= 1")
    out = np.empty(nodes.size, dtype=np.int64)
    if sorted(nodes.tolist()) != list(range(nodes.size)):
        raise DataError("node ids must be 0..V-1")
    out[nodes] = labels - 1
    return out


@dataclass
class PricePanel:
    prices: np.ndarray  # instruments x dates
    identifiers: list[str]
    dates: list[dt.date]

    def split_market(self, market: str) -> tuple[PricePanel, np.ndarray]:
        if market not in self.identifiers:
            raise DataError(f"market column {market!r} not in panel")
        j = self.identifiers.index(market)
        keep = [i for i in range(len(self.identifiers)) if i != j]
        rest = PricePanel(self.prices[keep], [self.identifiers[i] for i in keep], self.dates)
        return rest, self.prices[j]


def read_panel(path) -> PricePanel:
    """CSV with a header of instrument ids; first column holds ISO dates."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or len(header) < 2:
            raise DataError("panel header must list at least one instrument")
        dates, rows = [], []
        for line in reader:
            if not line:
                continue
            try:
                dates.append(dt.date.fromisoformat(line[0].strip()))
                rows.append([float(x) for x in line[1:]])
            except ValueError as exc:
                raise DataError(f"bad panel row {line!r}: {exc}") from exc
    if len(rows) < 3:
        raise DataError("panel needs at least three dates")
    prices = np.array(rows, dtype=np.float64).T
    if prices.shape[0] != len(header) - 1:
        raise DataError("row width does not match header")
    return PricePanel(prices, [h.strip() for h in header[1:]], dates)


def read_png(path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


def read_label_mask(path) -> np.ndarray:
    """Grayscale PNG; 0 means unlabelled, value ``k`` marks cluster ``k`` (1-based)."""
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.int64)


def write_png(path, rgb) -> None:
    from PIL import Image

    arr = np.clip(np.rint(np.asarray(rgb) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="RGB").save(path)
