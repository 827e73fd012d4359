"""Overlap sweeps on synthetic graphs and method comparisons on real ones.

A sweep fixes the mean degree ``c`` and the number of classes, varies
``c_out`` over a grid, samples one graph per (grid point, seed) and runs
every method on it. Work items are dispatched to a process pool whose size
comes from the ``SPARSECD_WORKERS`` environment variable (default 1); rows
are always returned in grid order.
"""
from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import ALL_METHODS, cluster_with
from .generators import ThetaSpec, detectability, planted_partition, sample_dcsbm
from .graph import SparseGraph
from .scoring import modularity, dcsbm_log_likelihood, overlap
from .spectral import ConvergenceError

logger = logging.getLogger(__name__)

WORKERS_ENV = "SPARSECD_WORKERS"

ROW_FIELDS = ("method", "dataset", "c", "c_in", "c_out", "alpha", "alpha_ratio", "seed",
              "overlap", "modularity", "neg_log_likelihood", "k", "status", "seconds")


def parse_grid(text: str) -> np.ndarray:
    """``"a:b:num"`` (inclusive linspace) or a comma-separated list."""
    s = text.strip()
    try:
        if ":" in s:
            a, b, num = s.split(":")
            num = int(num)
            if num < 1:
                raise ValueError
            vals = np.linspace(float(a), float(b), num)
        else:
            vals = np.array([float(x) for x in s.split(",") if x.strip()])
    except ValueError:
        raise ValueError(f"invalid grid {text!r}; use 'start:stop:num' or 'v1,v2,...'") from None
    if len(vals) == 0 or not np.all(np.isfinite(vals)):
        raise ValueError(f"invalid grid {text!r}")
    return vals


def c_out_from_alpha(c: float, alpha: float) -> float:
    return c - alpha * math.sqrt(c) / 2.0


@dataclass
class SweepConfig:
    n: int = 20000
    k: int = 2
    c: float = 5.0
    theta: str = "power-uniform(3,10,4)"
    c_out: list = field(default_factory=list)
    seeds: int = 5
    seed: int = 0
    methods: tuple = ALL_METHODS
    restarts: int = 10
    iters: int = 30
    tol: float = 1e-8

    def validate(self):
        if self.n < 2 or self.k < 2 or self.seeds < 1:
            raise ValueError("need n >= 2, k >= 2 and at least one seed")
        if not self.c > 0:
            raise ValueError("c must be positive")
        ThetaSpec.parse(self.theta)
        for co in self.c_out:
            # assortative models only: 0 < c_out < c < c_in
            if not 0 < co < self.c:
                raise ValueError(f"c_out={co:g} must lie in (0, c={self.c:g})")
        bad = set(self.methods) - set(ALL_METHODS)
        if bad:
            raise ValueError(f"unknown method(s) {sorted(bad)}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["c_out"] = [float(x) for x in self.c_out]
        d["methods"] = list(self.methods)
        return d


def graph_seed(base: int, point: int, rep: int) -> int:
    return int(np.random.SeedSequence([base, point, rep]).generate_state(1)[0])


def _run_methods(g: SparseGraph, k: int, truth, seed: int, methods, restarts, iters, tol, base: dict):
    rows = []
    for method in methods:
        row = dict(base, method=method, k=k, overlap=math.nan, modularity=math.nan,
                   neg_log_likelihood=math.nan, status="ok")
        t = time.perf_counter()
        try:
            res = cluster_with(method, g, k, seed=seed, tol=tol, restarts=restarts, iters=iters)
            if truth is not None:
                row["overlap"] = overlap(res.labels, truth, k)
            row["modularity"] = modularity(g, res.labels)
            if len(np.unique(res.labels)) == res.labels.max() + 1:
                row["neg_log_likelihood"] = dcsbm_log_likelihood(g, res.labels)
        except (ConvergenceError, ValueError, RuntimeError) as exc:
            logger.warning("%s failed: %s", method, exc)
            row["status"] = f"failed: {exc}"
        row["seconds"] = time.perf_counter() - t
        rows.append(row)
    return rows


def _sweep_item(args):
    cfg, point, rep = args
    c_out = float(cfg.c_out[point])
    c_in = cfg.k * cfg.c - (cfg.k - 1) * c_out
    params = planted_partition(cfg.n, cfg.k, c_in, c_out, cfg.theta)
    spec = detectability(params)
    seed = graph_seed(cfg.seed, point, rep)
    lg = sample_dcsbm(params, seed=seed)
    base = {
        "dataset": "dcsbm",
        "c": cfg.c,
        "c_in": c_in,
        "c_out": c_out,
        "alpha": spec.alpha,
        "alpha_ratio": spec.alpha / spec.alpha_c,
        "seed": seed,
    }
    return _run_methods(lg.graph, cfg.k, lg.labels, seed, cfg.methods, cfg.restarts, cfg.iters, cfg.tol, base)


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> list[dict]:
    """One row per (grid point, seed, method), in that nesting order."""
    cfg.validate()
    items = [(cfg, i, r) for i in range(len(cfg.c_out)) for r in range(cfg.seeds)]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(items) == 1:
        chunks = [_sweep_item(it) for it in items]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_item, items))
    return [row for chunk in chunks for row in chunk]


def run_dataset(g: SparseGraph, k: int, name: str = "graph", seed: int = 0, methods=ALL_METHODS,
                truth=None, restarts: int = 10, iters: int = 30, tol: float = 1e-8) -> list[dict]:
    """Every method on one graph with a fixed ``k``."""
    base = {"dataset": name, "c": float(g.degrees.mean()), "c_in": math.nan, "c_out": math.nan,
            "alpha": math.nan, "alpha_ratio": math.nan, "seed": seed}
    return _run_methods(g, k, truth, seed, methods, restarts, iters, tol, base)


def summarize(rows: list[dict], key: str = "overlap") -> list[dict]:
    """Mean and standard deviation of ``key`` per (method, dataset, c_out),
    ignoring failed runs."""
    groups: dict = {}
    for r in rows:
        gk = (r["method"], r["dataset"], r["c_out"])
        groups.setdefault(gk, []).append(r)
    out = []
    for (method, dataset, c_out), rs in groups.items():
        vals = np.array([r[key] for r in rs], dtype=float)
        ok = vals[np.isfinite(vals)]
        out.append({
            "method": method,
            "dataset": dataset,
            "c_out": c_out,
            "alpha_ratio": rs[0]["alpha_ratio"],
            f"{key}_mean": float(ok.mean()) if len(ok) else math.nan,
            f"{key}_sd": float(ok.std(ddof=1)) if len(ok) > 1 else (0.0 if len(ok) else math.nan),
            "runs": len(rs),
            "failed": int(len(rs) - len(ok)),
        })
    return out


def write_csv(rows: list[dict], path, fields=None) -> None:
    if fields is None:
        fields = list(rows[0].keys()) if rows else list(ROW_FIELDS)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({f: _fmt(r.get(f)) for f in fields})


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else "nan"
    return v
