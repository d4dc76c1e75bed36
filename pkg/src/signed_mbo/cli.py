"""Command-line entry point: ``signed-mbo <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import io
from .errors import DataError, NumericalError
from .experiments import ExperimentSpec, run_sweep, write_plot_csv
from .generators import BaParams, SsbmParams, equal_sizes, signed_ba, ssbm
from .graph import LaplacianKind
from .mbo import ConstraintSet, MboParams, StepForm, one_hot, run_mbo
from .pipelines import (
    ImageGraphParams,
    excess_returns,
    image_to_graph,
    log_returns,
    pearson_correlation_graph,
    symmetrize_center,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3
KNOWN_MODES = ("anchors", "fidelity", "avoidance", "fidelity_avoidance", "must_cannot")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _check_k(k: int):
    if k < 2:
        raise UsageError("K must be at least 2")


def cmd_generate(args) -> None:
    _check_k(args.k)
    sizes = tuple(equal_sizes(args.v, args.k))
    if args.model == "ssbm":
        graph, truth = ssbm(SsbmParams(sizes, args.sparsity, args.noise, args.seed))
        prov = f"ssbm v={args.v} k={args.k} sparsity={args.sparsity} noise={args.noise} seed={args.seed}"
    else:
        graph, truth = signed_ba(BaParams(sizes, args.v0, args.nu, args.noise, args.seed))
        prov = f"signed_ba v={args.v} k={args.k} v0={args.v0} nu={args.nu} noise={args.noise} seed={args.seed}"
    out = _out_dir(args)
    io.write_graph(out / "graph.mtx", graph, prov)
    io.write_labels(out / "labels.csv", truth.labels)


def _mbo_params(args) -> MboParams:
    return MboParams(
        d_tau=args.d_tau,
        n_tau=args.n_tau,
        m=args.m,
        eps_stop=args.eps_stop,
        max_iters=args.max_iters,
        seed=args.seed,
        step_form=StepForm(args.step_form),
    )


def _known_constraints(v: int, k: int, known: dict[int, int], mode: str, magnification: float,
                       link_weight: float, max_links: int, seed: int) -> ConstraintSet:
    if any(not 0 <= c < k for c in known.values()):
        raise DataError("known label outside 1..K")
    if mode == "anchors":
        return ConstraintSet(anchors=dict(known))
    nodes = np.fromiter(known.keys(), dtype=np.int64)
    labs = np.fromiter(known.values(), dtype=np.int64)
    if mode == "must_cannot":
        iu, ju = np.triu_indices(nodes.size, k=1)
        if iu.size > max_links:
            pick = np.random.default_rng(seed).choice(iu.size, size=max_links, replace=False)
            iu, ju = iu[pick], ju[pick]
        same = labs[iu] == labs[ju]

        def sym(mask):
            r, c = nodes[iu[mask]], nodes[ju[mask]]
            upper = sp.csr_matrix((np.ones(r.size), (r, c)), shape=(v, v))
            return sp.csr_matrix(upper + upper.T)

        return ConstraintSet(must_link=sym(same), cannot_link=sym(~same),
                             lambda_plus=link_weight, lambda_minus=link_weight)
    target = np.zeros((v, k))
    target[nodes] = one_hot(labs, k)
    weights = np.zeros(v)
    weights[nodes] = magnification
    cs = ConstraintSet()
    if mode in ("fidelity", "fidelity_avoidance"):
        cs.fidelity = (target, weights)
    if mode in ("avoidance", "fidelity_avoidance"):
        cs.avoidance = (target @ (np.ones((k, k)) - np.eye(k)), weights.copy())
    return cs


def _read_partial_labels(path) -> dict[int, int]:
    import csv

    with open(path, newline="") as fh:
        try:
            return {int(r["node_id"]): int(r["label"]) - 1 for r in csv.DictReader(fh)}
        except (KeyError, ValueError) as exc:
            raise DataError(f"malformed label file {path}: {exc}") from exc


def cmd_cluster(args) -> None:
    _check_k(args.k)
    graph = io.read_graph(args.graph)
    cs = None
    if args.known:
        known = _read_partial_labels(args.known)
        cs = _known_constraints(graph.node_count, args.k, known, args.known_mode, args.magnification,
                                args.link_weight, args.max_links, args.seed)
    res = run_mbo(graph, LaplacianKind(args.laplacian), args.k, _mbo_params(args), cs)
    out = _out_dir(args)
    io.write_labels(out / "labels.csv", res.labels)
    (out / "trace.jsonl").write_text(res.trace_jsonl())
    if not res.converged:
        logging.getLogger(__name__).warning("stopped at max_iters without convergence")


def cmd_bench(args) -> None:
    try:
        spec = ExperimentSpec.from_dict(json.loads(Path(args.spec).read_text()))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid experiment spec: {exc}") from exc
    if args.seed is not None:
        spec.master_seed = args.seed
    if args.trials is not None:
        spec.trials = args.trials
    report = run_sweep(spec, workers=args.threads, keep_labels=args.keep_labels)
    out = _out_dir(args)
    (out / "report.json").write_text(json.dumps(report, indent=1))
    write_plot_csv(report, out / "curves.csv")


def cmd_segment(args) -> None:
    _check_k(args.k)
    pixels = io.read_png(args.image)
    h, w = pixels.shape[:2]
    ig = image_to_graph(pixels, ImageGraphParams(args.radius, args.b))
    params = _mbo_params(args)
    kind = LaplacianKind(args.laplacian)
    res = run_mbo(ig.graph, kind, args.k, params)
    labels = res.labels
    if args.scribbles:
        mask = io.read_label_mask(args.scribbles)
        if mask.shape != (h, w):
            raise DataError(f"scribble mask shape {mask.shape} differs from image {(h, w)}")
        flat = mask.ravel()
        known = {int(i): int(flat[i]) - 1 for i in np.flatnonzero(flat)}
        cs = _known_constraints(h * w, args.k, known, args.scribble_mode, args.magnification,
                                args.link_weight, args.max_links, args.seed)
        labels = run_mbo(ig.graph, kind, args.k, params, cs, init=one_hot(labels, args.k)).labels
    flat_px = pixels.reshape(-1, 3)
    colors = np.zeros((args.k, 3))
    for c in range(args.k):
        sel = labels == c
        if sel.any():
            colors[c] = flat_px[sel].mean(axis=0)
    out = _out_dir(args)
    io.write_png(out / "segmentation.png", colors[labels].reshape(h, w, 3))
    io.write_labels(out / "labels.csv", labels)
    (out / "graph_meta.json").write_text(json.dumps(ig.metadata, indent=1))


def cmd_correlate(args) -> None:
    panel = io.read_panel(args.prices)
    market = None
    if args.market:
        panel, market = panel.split_market(args.market)
    returns = log_returns(panel.prices)
    if market is not None:
        returns = excess_returns(returns, log_returns(market[None, :])[0])
    graph = pearson_correlation_graph(returns)
    out = _out_dir(args)
    io.write_graph(out / "correlation.mtx", graph, f"pearson {Path(args.prices).name}")
    (out / "instruments.txt").write_text("\n".join(panel.identifiers) + "\n")


def cmd_symmetrize(args) -> None:
    graph = symmetrize_center(io.read_counts(args.counts))
    out = _out_dir(args)
    io.write_graph(out / "signed.mtx", graph, f"symmetrized+median-centred {Path(args.counts).name}")


def _add_mbo_flags(p):
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--laplacian", default="signed_sym", choices=[k.value for k in LaplacianKind])
    p.add_argument("--d-tau", type=float, default=0.1)
    p.add_argument("--n-tau", type=int, default=3)
    p.add_argument("--m", type=int, default=None, help="basis size (default K)")
    p.add_argument("--eps-stop", type=float, default=1e-7)
    p.add_argument("--max-iters", type=int, default=300)
    p.add_argument("--step-form", default="equation", choices=[s.value for s in StepForm])
    p.add_argument("--magnification", type=float, default=1.0, help="fidelity/avoidance weight")
    p.add_argument("--link-weight", type=float, default=1.0, help="must/cannot trade-off")
    p.add_argument("--max-links", type=int, default=200_000)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out-dir", default=".")

    parser = _Parser(prog="signed-mbo", description="Signed-graph MBO clustering.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", parents=[common], help="synthetic graph + labels")
    p.add_argument("--model", choices=["ssbm", "ba"], default="ssbm")
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--sparsity", type=float, default=0.1)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--v0", type=int, default=10)
    p.add_argument("--nu", type=int, default=5)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cluster", parents=[common], help="cluster a Matrix Market graph")
    p.add_argument("graph")
    _add_mbo_flags(p)
    p.add_argument("--known", help="CSV node_id,label of revealed labels")
    p.add_argument("--known-mode", choices=KNOWN_MODES, default="anchors")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("bench", parents=[common], help="run an experiment sweep")
    p.add_argument("spec", help="ExperimentSpec JSON")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--keep-labels", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("segment", parents=[common], help="segment a PNG image")
    p.add_argument("image")
    _add_mbo_flags(p)
    p.add_argument("--radius", type=float, default=5.0)
    p.add_argument("--b", type=float, default=14.0)
    p.add_argument("--scribbles", help="grayscale PNG: 0 unlabelled, k = cluster k")
    p.add_argument("--scribble-mode", choices=KNOWN_MODES, default="fidelity")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("correlate", parents=[common], help="price CSV -> correlation graph")
    p.add_argument("prices")
    p.add_argument("--market", help="column id used as market proxy for excess returns")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("symmetrize", parents=[common], help="directed counts -> signed graph")
    p.add_argument("counts")
    p.set_defaults(func=cmd_symmetrize)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("SIGNED_MBO_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command != "bench" and args.seed is None:
        args.seed = 0
    try:
        args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
