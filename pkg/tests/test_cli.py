import csv
import json

import numpy as np
import pytest

from sparsecd import __version__
from sparsecd.benchmark import SweepConfig, parse_grid, run_sweep, summarize
from sparsecd.cli import main
from sparsecd.spectral import ConvergenceError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_three_files_deterministic(tmp_path):
    a, b = tmp_path / "a" / "g", tmp_path / "b" / "g"
    for prefix in (a, b):
        assert main(["generate", "--n", "10000", "--k", "2", "--cin", "8", "--cout", "2", "--seed", "1",
                     "--out", str(prefix)]) == 0
    for ext in (".edges", ".labels", ".json"):
        pa, pb = a.parent / f"g{ext}", b.parent / f"g{ext}"
        assert pa.exists() and pa.read_bytes() == pb.read_bytes()
    manifest = json.loads((a.parent / "g.json").read_text())
    assert manifest["version"] == __version__ and manifest["params"]["c"] == 5.0
    assert manifest["zeta_theoretical"][1] == pytest.approx(5 / 3)


def test_generate_params_file(tmp_path):
    spec = tmp_path / "p.json"
    spec.write_text(json.dumps({"n": 500, "k": 3, "cin": 9, "cout": 1, "theta": "power-uniform(3,10,2)"}))
    assert main(["generate", "--params", str(spec), "--out", str(tmp_path / "g")]) == 0
    assert len((tmp_path / "g.labels").read_text().splitlines()) == 500


def test_generate_validation(capsys):
    code, _, err = run(capsys, "generate", "--n", "100", "--k", "2", "--cin", "0", "--cout", "2")
    assert code == 2 and "positive" in err
    code, _, err = run(capsys, "generate", "--n", "100", "--k", "2", "--cin", "3", "--cout", "2",
                       "--theta", "gamma(2)")
    assert code == 2


def test_cluster_karate_report(tmp_path):
    report, labels = tmp_path / "r.json", tmp_path / "l.txt"
    assert main(["cluster", "builtin:karate", "--k", "2", "--report", str(report),
                 "--labels-out", str(labels)]) == 0
    r = json.loads(report.read_text())
    assert r["scores"]["modularity"] == pytest.approx(0.37, abs=0.01)
    assert r["scores"]["neg_log_likelihood"] == pytest.approx(0.86, abs=0.01)
    assert r["version"] == __version__ and r["config"]["k"] == 2 and r["config"]["seed"] == 0
    assert r["k_hat"] == 2 and len(r["zeta"]["zeta"]) == 2 and "timings" in r
    lines = labels.read_text().splitlines()
    assert len(lines) == 34 and lines[0].split()[0] == "0"


def test_cluster_no_row_norm(capsys):
    code, out, _ = run(capsys, "cluster", "builtin:karate", "--k", "2", "--no-row-norm")
    r = json.loads(out)
    assert code == 0 and r["method"] == "bethe_hessian_zeta_no_norm" and r["config"]["no_row_norm"]
    assert len(r["labels"]) == 34


def test_cluster_estimates_k(capsys):
    code, out, _ = run(capsys, "cluster", "builtin:karate")
    assert code == 0 and json.loads(out)["k_estimate"]["k_hat"] == 2


def test_cluster_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "cluster", str(tmp_path / "nope.edges"))
    assert code == 2 and "no such file" in err


def test_cluster_algorithm_failure(capsys, tmp_path):
    tree = tmp_path / "tree.edges"
    tree.write_text("".join(f"{i} {i + 1}\n" for i in range(30)))
    code, _, err = run(capsys, "cluster", str(tree), "--k", "2")
    assert code == 1 and "failed" in err


def test_cluster_nonconvergence_exit_code(capsys, monkeypatch):
    def boom(*a, **k):
        raise ConvergenceError("no convergence")

    monkeypatch.setattr("sparsecd.cli.detect_communities", boom)
    code, _, _ = run(capsys, "cluster", "builtin:karate")
    assert code == 1


def test_cluster_with_truth_and_score(tmp_path, capsys):
    prefix = tmp_path / "g"
    main(["generate", "--n", "1500", "--k", "2", "--cin", "12", "--cout", "2", "--seed", "3", "--out", str(prefix)])
    code, out, _ = run(capsys, "cluster", f"{prefix}.edges", "--truth", f"{prefix}.labels",
                       "--labels-out", str(tmp_path / "hat.txt"))
    r = json.loads(out)
    assert code == 0 and r["scores"]["overlap"] > 0.5
    code, out, _ = run(capsys, "score", f"{prefix}.edges", str(tmp_path / "hat.txt"), "--truth", f"{prefix}.labels")
    s = json.loads(out)
    assert code == 0 and set(s) >= {"modularity", "neg_log_likelihood", "overlap", "k_used", "config"}


def test_score_bad_label_file(tmp_path, capsys):
    bad = tmp_path / "lab.txt"
    bad.write_text("0 1\n1\n")
    code, _, err = run(capsys, "score", "builtin:karate", str(bad))
    assert code == 2


def test_benchmark_rows_and_summary(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["benchmark", "--n", "2000", "--alpha-grid", "0.5:2.5:3", "--seeds", "2",
                 "--out", str(out), "--workers", "2", "--plot"]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6 * 3 * 2
    ov = np.array([float(r["overlap"]) for r in rows if r["status"] == "ok"])
    assert np.all((ov >= -0.1) & (ov <= 1))
    summary = list(csv.DictReader((tmp_path / "sweep_summary.csv").open()))
    assert len(summary) == 6 * 3
    assert (tmp_path / "sweep.png").stat().st_size > 0


def test_benchmark_row_count_full_grid():
    cfg = SweepConfig(n=1000, c=5.0, c_out=list(np.linspace(4.5, 1.0, 10)), seeds=5, tol=1e-6, restarts=2)
    rows = run_sweep(cfg, workers=4)
    assert len(rows) == 6 * 10 * 5
    assert len(summarize(rows)) == 6 * 10


def test_benchmark_parallel_matches_serial():
    cfg = SweepConfig(n=1000, c=5.0, c_out=[1.5, 3.0], seeds=2, methods=("bethe_hessian_zeta", "adjacency"))
    serial, parallel = run_sweep(cfg, workers=1), run_sweep(cfg, workers=3)
    strip = [{k: v for k, v in r.items() if k != "seconds"} for r in serial]
    assert strip == [{k: v for k, v in r.items() if k != "seconds"} for r in parallel]


def test_benchmark_dataset_mode(tmp_path):
    out = tmp_path / "k.csv"
    assert main(["benchmark", "--graph", "builtin:karate", "--k", "2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["method"] for r in rows] == list(("bethe_hessian_zeta", "adjacency", "rw_laplacian",
                                                 "reg_sym_laplacian", "bethe_hessian_fixed", "non_backtracking"))
    assert float(rows[0]["modularity"]) == pytest.approx(0.3715, abs=1e-4)


def test_benchmark_invalid_grid(capsys):
    assert run(capsys, "benchmark", "--cout-grid", "9:1")[0] == 2
    assert run(capsys, "benchmark", "--cout-grid", "6", "--c", "5")[0] == 2
    assert run(capsys, "benchmark", "--methods", "louvain")[0] == 2


def test_parse_grid():
    assert parse_grid("1:2:3").tolist() == [1.0, 1.5, 2.0]
    assert parse_grid("0.5, 2").tolist() == [0.5, 2.0]
    with pytest.raises(ValueError):
        parse_grid("a:b")


def test_workers_env(monkeypatch):
    from sparsecd.benchmark import worker_count

    monkeypatch.setenv("SPARSECD_WORKERS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SPARSECD_WORKERS", "x")
    with pytest.raises(ValueError):
        worker_count()


def test_spectrum_trace_and_zeta(tmp_path, capsys):
    plot = tmp_path / "s.png"
    code, out, _ = run(capsys, "spectrum", "builtin:karate", "--r-grid", "1:2.5:31", "--p", "3", "--k", "2",
                       "--companion", "10", "--plot", str(plot))
    r = json.loads(out)
    assert code == 0 and plot.stat().st_size > 0
    grid = np.array(r["r_grid"])
    assert grid[0] == 1.0 and grid[-1] == 2.5
    vals = np.array(r["smallest_eigenvalues"])
    z2 = r["zeta"]["zeta"][1]
    # s_2 changes sign between the grid points around zeta_2
    i = np.searchsorted(grid, z2)
    assert vals[i - 1, 1] > 0 > vals[i, 1]
    assert len(r["companion_eigenvalues"]["real"]) == 68


def test_spectrum_counts_components_at_one(tmp_path, capsys):
    f = tmp_path / "g.edges"
    f.write_text("0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n6 7\n7 8\n8 6\n8 9\n")
    code, out, _ = run(capsys, "spectrum", str(f), "--r-grid", "1,1.5", "--p", "4")
    vals = np.array(json.loads(out)["smallest_eigenvalues"])
    assert code == 0 and np.sum(np.abs(vals[0]) < 1e-10) == 3


def test_spectrum_invalid(capsys):
    assert run(capsys, "spectrum", "builtin:karate", "--r-grid", "x")[0] == 2
    assert run(capsys, "spectrum", "builtin:nothing")[0] == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0 and __version__ in capsys.readouterr().out
