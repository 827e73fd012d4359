"""Command-line interface: ``sparsecd generate|cluster|score|benchmark|spectrum``.

Exit codes: 0 on success, 1 when an algorithm fails (non-convergence,
missing parameters), 2 for I/O and validation errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import ALL_METHODS
from .benchmark import ROW_FIELDS, SweepConfig, c_out_from_alpha, parse_grid, run_dataset, run_sweep, summarize, write_csv
from .clustering import detect_communities
from .datasets import resolve
from .estimation import EstimationError, compute_zeta
from .generators import ThetaSpec, detectability, planted_partition, sample_dcsbm
from .graph import GraphError, largest_component, read_edge_list, write_edge_list
from .scoring import score_partition
from .spectral import ConvergenceError, bethe_hessian_trace, companion_eigenvalues, spectral_radius_B

logger = logging.getLogger("sparsecd")

EXIT_OK, EXIT_ALGORITHM, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _clean(obj):
    """Make numpy values and non-finite floats JSON friendly."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _dump(obj, path=None):
    text = json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func",)}


def _load_graph(path, strict=False):
    p = resolve(path)
    if not p.exists():
        raise InputError(f"cannot read graph file {path!r}: no such file")
    return read_edge_list(p, strict=strict)


def read_labels(path, node_ids: np.ndarray) -> np.ndarray:
    """Read ``node_id label`` lines onto the dense node order of a graph."""
    p = Path(path)
    if not p.exists():
        raise InputError(f"cannot read label file {path!r}: no such file")
    index = {int(v): i for i, v in enumerate(node_ids)}
    out = np.full(len(node_ids), -1, dtype=np.int64)
    with p.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s[0] in "#%":
                continue
            tok = s.split()
            try:
                node, lab = int(tok[0]), int(tok[1])
            except (IndexError, ValueError):
                raise InputError(f"{path}:{lineno}: expected 'node_id label'") from None
            if node in index:
                out[index[node]] = lab
    missing = np.flatnonzero(out < 0)
    if len(missing):
        raise InputError(f"{path}: no label for {len(missing)} node(s), e.g. {int(node_ids[missing[0]])}")
    return out


def write_labels(path, node_ids, labels) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for v, lab in zip(node_ids, labels):
            fh.write(f"{int(v)} {int(lab)}\n")


# ---------------------------------------------------------------- commands

def cmd_generate(args) -> int:
    if args.params:
        spec = json.loads(Path(args.params).read_text(encoding="utf-8"))
        for key, val in spec.items():
            setattr(args, key.replace("-", "_"), val)
    for name in ("n", "k", "cin", "cout"):
        if getattr(args, name) is None:
            raise InputError(f"--{name} is required (or give it in --params)")
    if args.cin <= 0 or args.cout <= 0:
        raise InputError("--cin and --cout must be positive")
    params = planted_partition(int(args.n), int(args.k), float(args.cin), float(args.cout), args.theta)
    lg = sample_dcsbm(params, seed=args.seed)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    edges_path = Path(f"{prefix}.edges")
    labels_path = Path(f"{prefix}.labels")
    write_edge_list(lg.graph, edges_path)
    write_labels(labels_path, np.arange(lg.graph.n), lg.labels)
    spec = detectability(params)
    manifest = {
        "version": __version__,
        "command": "generate",
        "seed": args.seed,
        "params": params.to_dict(),
        "alpha": spec.alpha,
        "alpha_c": spec.alpha_c,
        "zeta_theoretical": spec.zeta_theoretical,
        "edges_file": edges_path.name,
        "labels_file": labels_path.name,
        "n_edges": lg.graph.m,
    }
    _dump(manifest, Path(f"{prefix}.json"))
    return EXIT_OK


def cmd_cluster(args) -> int:
    g, node_ids = _load_graph(args.graph, strict=args.strict)
    res = detect_communities(g, k=args.k, row_normalize=not args.no_row_norm, seed=args.seed,
                             tol=args.tol, restarts=args.restarts, iters=args.iters)
    truth = read_labels(args.truth, node_ids) if args.truth else None
    giant = ~res.unassigned
    sub, _ = largest_component(g)
    res.scores = score_partition(sub, res.labels[giant], None if truth is None else truth[giant])
    report = {"version": __version__, "command": "cluster", "config": _config(args), **res.to_dict()}
    if res.unassigned.any():
        report["unassigned_nodes"] = node_ids[res.unassigned]
    if args.labels_out:
        write_labels(args.labels_out, node_ids, res.labels)
    else:
        report["labels"] = {int(v): int(lab) for v, lab in zip(node_ids, res.labels)}
    _dump(report, args.report)
    return EXIT_OK


def cmd_score(args) -> int:
    g, node_ids = _load_graph(args.graph, strict=args.strict)
    labels = read_labels(args.labels, node_ids)
    truth = read_labels(args.truth, node_ids) if args.truth else None
    bundle = score_partition(g, labels, truth)
    _dump({"version": __version__, "command": "score", "config": _config(args), **bundle.to_dict()}, args.report)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    methods = tuple(args.methods.split(",")) if args.methods else ALL_METHODS
    bad = set(methods) - set(ALL_METHODS)
    if bad:
        raise InputError(f"unknown method(s) {sorted(bad)}; choose from {', '.join(ALL_METHODS)}")
    if args.graph:
        if args.k is None:
            raise InputError("--k is required with --graph")
        g, node_ids = _load_graph(args.graph, strict=args.strict)
        truth = read_labels(args.truth, node_ids) if args.truth else None
        rows = run_dataset(g, args.k, name=Path(args.graph).stem, seed=args.seed, methods=methods,
                           truth=truth, restarts=args.restarts, iters=args.iters, tol=args.tol)
        key = "overlap" if truth is not None else "modularity"
    else:
        theta = ThetaSpec.parse(args.theta)
        if args.cout_grid and args.alpha_grid:
            raise InputError("give either --cout-grid or --alpha-grid, not both")
        if args.cout_grid:
            grid = parse_grid(args.cout_grid)
        else:
            ratios = parse_grid(args.alpha_grid or "0.25:3:10")
            alpha_c = 2.0 / math.sqrt(theta.phi)
            grid = np.array([c_out_from_alpha(args.c, a * alpha_c) for a in ratios])
        cfg = SweepConfig(n=args.n, k=args.k or 2, c=args.c, theta=str(theta), c_out=list(grid),
                          seeds=args.seeds, seed=args.seed, methods=methods, restarts=args.restarts,
                          iters=args.iters, tol=args.tol)
        cfg.validate()
        rows = run_sweep(cfg, workers=args.workers)
        key = "overlap"
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(rows, out, ROW_FIELDS)
    summary = summarize(rows, key)
    summary_path = out.with_name(out.stem + "_summary.csv")
    write_csv(summary, summary_path)
    if args.plot:
        from .plotting import plot_sweep

        plot_sweep(summary, out.with_suffix(".png"), key)
    logger.info("wrote %d rows to %s", len(rows), out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    g, _ = _load_graph(args.graph, strict=args.strict)
    rho = spectral_radius_B(g, seed=args.seed)
    if args.r_grid:
        r_grid = parse_grid(args.r_grid)
    else:
        r_grid = np.linspace(1.0, max(math.sqrt(rho), 1.0) * 1.2, 41)
    if np.any(r_grid <= 0):
        raise InputError("r grid must be positive")
    if args.p < 1 or args.p >= g.n:
        raise InputError(f"--p must be in [1, {g.n - 1}]")
    # the whole graph: at r = 1 there is one zero per connected component
    values = bethe_hessian_trace(g, r_grid, args.p, seed=args.seed)
    report = {
        "version": __version__,
        "command": "spectrum",
        "config": _config(args),
        "rho_B": rho,
        "sqrt_rho_B": math.sqrt(rho),
        "r_grid": r_grid,
        "smallest_eigenvalues": values,
    }
    zeta = None
    if args.k:
        sub, _ = largest_component(g)
        z = compute_zeta(sub, args.k, seed=args.seed)
        zeta = z.zeta
        report["zeta"] = z.to_dict()
    comp = None
    if args.companion:
        comp = companion_eigenvalues(g, count=args.companion, seed=args.seed)
        report["companion_eigenvalues"] = {"real": np.real(comp), "imag": np.imag(comp)}
    _dump(report, args.report)
    if args.plot:
        from .plotting import plot_spectrum

        plot_spectrum(r_grid, values, args.plot, zeta=zeta, companion=comp)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sparsecd", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def graph_args(p):
        p.add_argument("graph", help="edge list file ('u v' per line) or builtin:karate")
        p.add_argument("--strict", action="store_true", help="reject self-loops and duplicate edges")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("generate", help="sample a DC-SBM graph with ground truth")
    p.add_argument("--params", help="JSON file with any of the options below")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--cin", type=float)
    p.add_argument("--cout", type=float)
    p.add_argument("--theta", default="constant", help="'constant' or 'power-uniform(a,b,e)'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="dcsbm", help="output prefix for .edges/.labels/.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("cluster", help="detect communities")
    graph_args(p)
    p.add_argument("--k", type=int, help="number of classes (estimated if omitted)")
    p.add_argument("--no-row-norm", action="store_true", help="skip the projection on the unit sphere")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--iters", type=int, default=30)
    p.add_argument("--truth", help="ground-truth label file, adds the overlap to the report")
    p.add_argument("--labels-out", help="write 'node_id label' lines here (else labels go in the report)")
    p.add_argument("--report", default="-", help="JSON report path (default stdout)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("score", help="score a partition")
    graph_args(p)
    p.add_argument("labels")
    p.add_argument("--truth")
    p.add_argument("--report", default="-")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("benchmark", help="compare methods on a c_out sweep or on one graph")
    p.add_argument("--graph", help="run every method on this graph instead of a sweep")
    p.add_argument("--truth")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=float, default=5.0)
    p.add_argument("--theta", default="power-uniform(3,10,4)")
    p.add_argument("--cout-grid", help="'start:stop:num' or comma list of c_out values")
    p.add_argument("--alpha-grid", help="grid of alpha/alpha_c ratios (default 0.25:3:10)")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--methods", help=f"comma list from {','.join(ALL_METHODS)}")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--iters", type=int, default=30)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--workers", type=int, help="process count (default $SPARSECD_WORKERS or 1)")
    p.add_argument("--out", default="benchmark.csv")
    p.add_argument("--plot", action="store_true", help="also render a PNG next to the CSV")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("spectrum", help="trace the smallest Bethe-Hessian eigenvalues against r")
    graph_args(p)
    p.add_argument("--r-grid", help="'start:stop:num' or comma list (default 1..1.2 sqrt(rho))")
    p.add_argument("--p", type=int, default=4, help="number of eigenvalues per grid point")
    p.add_argument("--k", type=int, help="also compute zeta_1..zeta_k")
    p.add_argument("--companion", type=int, default=0, help="dump this many eigenvalues of B'")
    p.add_argument("--report", default="-")
    p.add_argument("--plot", help="PNG path for the trace")
    p.set_defaults(func=cmd_spectrum)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, GraphError, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"sparsecd {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, EstimationError, RuntimeError) as exc:
        print(f"sparsecd {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_ALGORITHM


if __name__ == "__main__":
    sys.exit(main())
