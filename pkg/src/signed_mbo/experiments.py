"""Reproducible benchmark sweeps over generator, constraint and solver settings."""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np
import scipy.sparse as sp

from .errors import SignedMboError
from .generators import BaParams, GroundTruth, SsbmParams, equal_sizes, signed_ba, ssbm
from .graph import LaplacianKind, build_laplacian
from .io import read_graph, read_labels
from .mbo import Composition, ConstraintSet, MboParams, StepForm, run_mbo
from .metrics import ari, bnc_objective, kmeans_pp
from .spectral import smallest_eigenpairs

log = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
KMEANS_EMBEDDING = "bottom-K eigenvectors of the signed symmetric Laplacian"
CONSTRAINT_STACKING = "additive: revealed links add weight on top of existing edges"
PLOT_COLUMNS = ("lambda", "eta", "alpha", "k", "d_tau", "solver", "mean_ari", "stderr_ari", "n_trials")
MODES = ("none", "must_cannot", "must", "cannot", "fidelity_avoidance", "fidelity", "avoidance", "anchors")


@dataclass(frozen=True)
class ConstraintRecipe:
    mode: str = "none"
    alpha: float = 0.0
    magnification: float = 30.0
    composition: str = "clean"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown constraint mode {self.mode!r}")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        Composition(self.composition)


def _pick_nodes(v: int, alpha: float, rng) -> np.ndarray:
    count = int(round(alpha * v))
    return np.sort(rng.choice(v, size=count, replace=False))


def reveal_constraints(truth: GroundTruth, recipe: ConstraintRecipe, seed) -> ConstraintSet:
    """Leak an ``alpha`` share of the ground truth as semi-supervision.

    Pair modes sample each unordered pair independently with probability
    ``alpha``; same-cluster pairs become must-links, others cannot-links (both
    weight 1). Node modes pick ``round(alpha * V)`` nodes uniformly.
    """
    rng = np.random.default_rng(seed)
    v = truth.labels.size
    k = truth.k
    cs = ConstraintSet()
    if recipe.mode == "none" or recipe.alpha == 0:
        return cs
    if recipe.mode in ("must_cannot", "must", "cannot"):
        rows, cols = np.triu_indices(v, k=1)
        take = rng.random(rows.size) < recipe.alpha
        rows, cols = rows[take], cols[take]
        same = truth.labels[rows] == truth.labels[cols]

        def sym(mask):
            r, c = rows[mask], cols[mask]
            ones = np.ones(r.size)
            upper = sp.csr_matrix((ones, (r, c)), shape=(v, v))
            return sp.csr_matrix(upper + upper.T)

        if recipe.mode in ("must_cannot", "must"):
            cs.must_link = sym(same)
        if recipe.mode in ("must_cannot", "cannot"):
            cs.cannot_link = sym(~same)
        return cs
    nodes = _pick_nodes(v, recipe.alpha, rng)
    if recipe.mode == "anchors":
        cs.anchors = {int(i): int(truth.labels[i]) for i in nodes}
        return cs
    target = np.zeros((v, k))
    target[nodes] = truth.one_hot[nodes]
    weights = np.zeros(v)
    weights[nodes] = recipe.magnification
    if recipe.mode in ("fidelity_avoidance", "fidelity"):
        cs.fidelity = (target, weights)
    if recipe.mode in ("fidelity_avoidance", "avoidance"):
        cs.avoidance = (target @ (np.ones((k, k)) - np.eye(k)), weights.copy())
    return cs


def derive_seed(master_seed: int, *coords) -> int:
    """64-bit seed from BLAKE2b over the canonical JSON of ``(master_seed, coords)``.

    Adding grid points or trials never changes the seeds of existing ones.
    """
    payload = json.dumps([int(master_seed), *[_canon(c) for c in coords]], separators=(",", ":"))
    return int.from_bytes(hashlib.blake2b(payload.encode(), digest_size=8).digest(), "little")


def _canon(x):
    if isinstance(x, float):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.floating):
        return repr(float(x))
    return x


@dataclass
class ExperimentSpec:
    """A sweep: generator settings, solver list, grid axes and trial count.

    ``generator`` is a dict with ``type`` in ``{"ssbm", "ba", "file"}``; ssbm
    takes ``v``, ba takes ``v``, ``v0``, ``nu``; file takes ``graph`` and
    ``labels`` paths (the λ, η and K axes are then ignored).
    """

    generator: dict
    solvers: list[str] = field(default_factory=lambda: ["mbo"])
    sparsity: list[float] = field(default_factory=lambda: [0.1])
    noise: list[float] = field(default_factory=lambda: [0.05])
    k: list[int] = field(default_factory=lambda: [5])
    alpha: list[float] = field(default_factory=lambda: [0.0])
    d_tau: list[float] = field(default_factory=lambda: [0.1])
    trials: int = 20
    master_seed: int = 0
    laplacian: str = "signed_sym"
    n_tau: int = 3
    m: int | None = None
    eps_stop: float = 1e-7
    max_iters: int = 300
    step_form: str = "equation"
    constraint_mode: str = "none"
    magnification: float = 30.0
    composition: str = "clean"
    kmeans_restarts: int = 10

    def __post_init__(self):
        for name in ("sparsity", "noise", "k", "alpha", "d_tau", "solvers"):
            if not getattr(self, name):
                raise ValueError(f"sweep axis {name!r} is empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.generator.get("type") not in ("ssbm", "ba", "file"):
            raise ValueError("generator.type must be one of ssbm, ba, file")
        unknown = set(self.solvers) - {"mbo", "kmeans_pp"}
        if unknown:
            raise ValueError(f"unknown solvers {sorted(unknown)}")
        LaplacianKind(self.laplacian)
        StepForm(self.step_form)
        ConstraintRecipe(self.constraint_mode, 0.0, self.magnification, self.composition)

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentSpec:
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown spec fields {sorted(extra)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def grid(self):
        for lam, eta, k, alpha, dtau in itertools.product(
            self.sparsity, self.noise, self.k, self.alpha, self.d_tau
        ):
            yield {"lambda": lam, "eta": eta, "k": k, "alpha": alpha, "d_tau": dtau}


def make_instance(spec: ExperimentSpec, point: dict, seed: int):
    gen = spec.generator
    if gen["type"] == "ssbm":
        sizes = tuple(equal_sizes(int(gen["v"]), point["k"]))
        return ssbm(SsbmParams(sizes, point["lambda"], point["eta"], seed))
    if gen["type"] == "ba":
        sizes = tuple(equal_sizes(int(gen["v"]), point["k"]))
        return signed_ba(BaParams(sizes, int(gen["v0"]), int(gen["nu"]), point["eta"], seed))
    graph = read_graph(gen["graph"])
    return graph, GroundTruth(read_labels(gen["labels"]))


def instance_seed(master_seed: int, point: dict, trial: int) -> int:
    """Generator seed shared by all solver settings (alpha, d_tau) of one instance."""
    return derive_seed(master_seed, "instance", point["lambda"], point["eta"], point["k"], trial)


def run_trial(spec: ExperimentSpec, point: dict, sub_seed: int, inst_seed: int) -> list[dict]:
    """Run every solver on one instance; returns one record per solver, labels included.

    ``inst_seed`` fixes the graph, ``sub_seed`` the constraint reveal and solver streams.
    """
    cons_seed, solver_seed = (
        int(s.generate_state(1, dtype=np.uint64)[0]) for s in np.random.SeedSequence(sub_seed).spawn(2)
    )
    base = {**point, "sub_seed": sub_seed, "instance_seed": inst_seed}
    try:
        graph, truth = make_instance(spec, point, inst_seed)
    except SignedMboError as exc:
        return [{**base, "solver": s, "ok": False, "error": f"{type(exc).__name__}: {exc}"} for s in spec.solvers]
    k = truth.k if spec.generator["type"] == "file" else point["k"]
    kind = LaplacianKind(spec.laplacian)
    records = []
    for solver in spec.solvers:
        rec = {**base, "solver": solver}
        start = time.perf_counter()
        try:
            if solver == "mbo":
                recipe = ConstraintRecipe(spec.constraint_mode, point["alpha"], spec.magnification, spec.composition)
                cs = reveal_constraints(truth, recipe, cons_seed)
                params = MboParams(
                    d_tau=point["d_tau"],
                    n_tau=spec.n_tau,
                    m=spec.m,
                    eps_stop=spec.eps_stop,
                    max_iters=spec.max_iters,
                    seed=solver_seed,
                    step_form=StepForm(spec.step_form),
                )
                res = run_mbo(graph, kind, k, params, None if cs.is_empty else cs,
                              composition=Composition(spec.composition))
                labels = res.labels
                rec.update(
                    iterations=res.iterations,
                    converged=res.converged,
                    initial_ari=ari(res.initial_labels, truth.labels),
                )
            else:
                op = build_laplacian(graph, LaplacianKind.SIGNED_SYMMETRIC)
                basis = smallest_eigenpairs(op, k, seed=solver_seed)
                labels = kmeans_pp(basis.eigenvectors, k, seed=solver_seed % 2**32, restarts=spec.kmeans_restarts)
                rec.update(iterations=None, converged=None, initial_ari=None)
            rec["ari"] = ari(labels, truth.labels)
            try:
                rec["bnc"] = bnc_objective(labels, graph, k)
            except SignedMboError:
                rec["bnc"] = None  # empty cluster in the output
            rec["ok"] = True
            rec["labels"] = labels.tolist()
        except SignedMboError as exc:
            rec.update(ok=False, error=f"{type(exc).__name__}: {exc}")
        rec["wall_time"] = time.perf_counter() - start
        records.append(rec)
    return records


def _task(args):
    spec_dict, point, seed, inst = args
    return run_trial(ExperimentSpec.from_dict(spec_dict), point, seed, inst)


def _aggregate(records: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for r in records:
        key = (r["lambda"], r["eta"], r["k"], r["alpha"], r["d_tau"], r["solver"])
        groups.setdefault(key, []).append(r)
    out = []
    for (lam, eta, k, alpha, dtau, solver), recs in groups.items():
        good = [r for r in recs if r.get("ok")]
        aris = np.array([r["ari"] for r in good], dtype=np.float64)
        n = aris.size
        bncs = [r["bnc"] for r in good if r.get("bnc") is not None]
        out.append(
            {
                "lambda": lam,
                "eta": eta,
                "k": k,
                "alpha": alpha,
                "d_tau": dtau,
                "solver": solver,
                "n_trials": n,
                "n_failed": len(recs) - n,
                "mean_ari": float(aris.mean()) if n else None,
                "stderr_ari": float(aris.std(ddof=1) / math.sqrt(n)) if n > 1 else (0.0 if n else None),
                "mean_bnc": float(np.mean(bncs)) if bncs else None,
            }
        )
    return out


def run_sweep(spec: ExperimentSpec, workers: int = 1, keep_labels: bool = False) -> dict:
    """Run the whole grid; the report depends only on ``spec`` (wall times aside)."""
    tasks = []
    for point in spec.grid():
        for trial in range(spec.trials):
            seed = derive_seed(spec.master_seed, point["lambda"], point["eta"], point["k"],
                               point["alpha"], point["d_tau"], trial)
            tasks.append((point, trial, seed, instance_seed(spec.master_seed, point, trial)))
    spec_dict = spec.to_dict()
    args = [(spec_dict, p, s, inst) for p, _, s, inst in tasks]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, args))
    else:
        results = [_task(a) for a in args]
    records = []
    for (point, trial, _, _), recs in zip(tasks, results):
        for r in recs:
            r["trial"] = trial
            if not keep_labels:
                r.pop("labels", None)
            records.append(r)
    return {
        "schema_version": SCHEMA_VERSION,
        "spec": spec_dict,
        "kmeans_embedding": KMEANS_EMBEDDING,
        "constraint_stacking": CONSTRAINT_STACKING,
        "records": records,
        "aggregates": _aggregate(records),
    }


def report_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text())


def write_plot_csv(report: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PLOT_COLUMNS)
        for a in report["aggregates"]:
            w.writerow([a["lambda"], a["eta"], a["alpha"], a["k"], a["d_tau"], a["solver"],
                        a["mean_ari"], a["stderr_ari"], a["n_trials"]])


def strip_timing(report: dict) -> dict:
    """Copy of ``report`` without wall-time fields, for determinism comparisons."""
    clone = json.loads(json.dumps(report))
    for r in clone["records"]:
        r.pop("wall_time", None)
    return clone
