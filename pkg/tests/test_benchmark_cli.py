"""Benchmark grid determinism and command-line behavior."""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from copulabn.benchmark import BenchmarkRow, mask_seed_for, run_benchmark
from copulabn.cli import main
from copulabn.data import ExperimentProtocol, save_csv
from copulabn.data import MaskedDataset

from conftest import chain_scores, cycle_warps, warp_columns


@pytest.fixture(scope="module")
def small_csv(tmp_path_factory):
    rng = np.random.default_rng(21)
    z = chain_scores(0.6, 3, 240, rng)
    x = warp_columns(z, cycle_warps(3))
    path = tmp_path_factory.mktemp("data") / "chain.csv"
    save_csv(MaskedDataset.from_values(x, ("u", "v", "w")), path)
    return path


def _tiny_protocol():
    return ExperimentProtocol(num_splits=2, base_seed=7)


# ----------------------------------------------------------- benchmark


def test_benchmark_csv_is_byte_identical_across_reruns(small_csv, tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    r1 = run_benchmark(small_csv, _tiny_protocol(), ["cbn", "lgbn"], [1], [0.0, 0.1], out1)
    r2 = run_benchmark(small_csv, _tiny_protocol(), ["cbn", "lgbn"], [1], [0.0, 0.1], out2)
    assert out1.read_bytes() == out2.read_bytes()
    assert [r.test_score for r in r1.rows] == [r.test_score for r in r2.rows]


def test_benchmark_rows_and_aggregates_are_consistent(small_csv, tmp_path):
    out = tmp_path / "bench.csv"
    result = run_benchmark(small_csv, _tiny_protocol(), ["cbn"], [1], [0.0, 0.1], out)
    # 1 kind x 1 cap x 2 fractions x 2 splits
    assert len(result.rows) == 4
    assert all(isinstance(r, BenchmarkRow) for r in result.rows)
    assert len(result.aggregates) == 2
    for agg in result.aggregates:
        cell = [
            r
            for r in result.rows
            if (r.model_kind, r.max_parents, r.missing_fraction)
            == (agg.model_kind, agg.max_parents, agg.missing_fraction)
        ]
        tests = [r.test_score for r in cell]
        np.testing.assert_allclose(agg.test_mean, np.mean(tests), rtol=0, atol=1e-12)
        np.testing.assert_allclose(
            agg.test_p10, np.percentile(tests, 10), rtol=0, atol=1e-12
        )
        np.testing.assert_allclose(
            agg.test_p90, np.percentile(tests, 90), rtol=0, atol=1e-12
        )

    # the CSV holds one line per row plus one per aggregate plus a header
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 1 + len(result.rows) + len(result.aggregates)
    header = lines[0].split(",")
    assert header[0] == "row_kind"
    with open(out, newline="") as fh:
        parsed = list(csv.DictReader(fh))
    split_rows = [p for p in parsed if p["row_kind"] == "split"]
    assert float(split_rows[0]["test_score"]) == result.rows[0].test_score


def test_benchmark_manifest_sidecar(small_csv, tmp_path):
    out = tmp_path / "bench.csv"
    run_benchmark(small_csv, _tiny_protocol(), ["cbn"], [1], [0.0], out)
    manifest = json.loads((tmp_path / "bench.csv.manifest.json").read_text())
    assert manifest["dataset"] == str(small_csv)
    assert manifest["protocol"]["num_splits"] == 2
    assert manifest["protocol"]["base_seed"] == 7
    assert manifest["grid"]["model_kinds"] == ["cbn"]
    assert "cell_wall_seconds" in manifest


def test_mask_seeds_differ_by_role_and_fraction():
    a = mask_seed_for(0, 0, 0.1, "train")
    b = mask_seed_for(0, 0, 0.1, "test")
    c = mask_seed_for(0, 0, 0.2, "train")
    d = mask_seed_for(0, 1, 0.1, "train")
    assert len({a, b, c, d}) == 4
    with pytest.raises(Exception):
        mask_seed_for(0, 0, 0.1, "validation")


# ----------------------------------------------------------------- cli


def test_cli_fit_eval_reproduces_benchmark_cell(small_csv, tmp_path, capsys):
    bench_out = tmp_path / "bench.csv"
    assert main([
        "benchmark", "--data", str(small_csv), "--model", "cbn",
        "--max-parents", "1", "--missing-fraction", "0.1",
        "--splits", "2", "--seed", "7", "--out", str(bench_out),
    ]) == 0
    with open(bench_out, newline="") as fh:
        rows = [r for r in csv.DictReader(fh) if r["row_kind"] == "split"]
    target = rows[0]
    assert target["split_index"] == "0"

    model_out = tmp_path / "model.json"
    assert main([
        "fit", "--data", str(small_csv), "--model", "cbn", "--max-parents", "1",
        "--missing-fraction", "0.1", "--splits", "2", "--seed", "7",
        "--split-index", "0", "--out", str(model_out),
    ]) == 0
    capsys.readouterr()

    scores_out = tmp_path / "scores.csv"
    assert main([
        "eval", "--model-file", str(model_out), "--data", str(small_csv),
        "--missing-fraction", "0.1", "--splits", "2", "--seed", "7",
        "--split-index", "0", "--role", "test", "--out", str(scores_out),
    ]) == 0
    mean_line = capsys.readouterr().out.strip()
    reported = float(mean_line.rsplit(" ", 1)[-1])
    np.testing.assert_allclose(reported, float(target["test_score"]), rtol=0, atol=1e-9)

    # per-instance file agrees with the printed mean
    with open(scores_out, newline="") as fh:
        per_row = [float(r["log_score"]) for r in csv.DictReader(fh)]
    np.testing.assert_allclose(np.mean(per_row), reported, rtol=0, atol=1e-12)

    # train-role scoring reproduces the train column too
    assert main([
        "eval", "--model-file", str(model_out), "--data", str(small_csv),
        "--missing-fraction", "0.1", "--splits", "2", "--seed", "7",
        "--split-index", "0", "--role", "train",
    ]) == 0
    train_line = capsys.readouterr().out.strip()
    np.testing.assert_allclose(
        float(train_line.rsplit(" ", 1)[-1]), float(target["train_score"]),
        rtol=0, atol=1e-9,
    )


def test_cli_sample_round_trips(small_csv, tmp_path, capsys):
    model_out = tmp_path / "model.json"
    assert main([
        "fit", "--data", str(small_csv), "--max-parents", "1",
        "--out", str(model_out),
    ]) == 0
    sample_out = tmp_path / "sample.csv"
    assert main([
        "sample", "--model-file", str(model_out), "--count", "50",
        "--seed", "3", "--out", str(sample_out),
    ]) == 0
    capsys.readouterr()
    with open(sample_out, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = list(reader)
    assert header == ["u", "v", "w"]
    assert len(body) == 50
    assert all(np.isfinite(float(cell)) for row in body for cell in row)


def test_cli_sample_rejects_lgbn_models(small_csv, tmp_path, capsys):
    model_out = tmp_path / "lg.json"
    assert main([
        "fit", "--data", str(small_csv), "--model", "lgbn",
        "--max-parents", "1", "--out", str(model_out),
    ]) == 0
    code = main([
        "sample", "--model-file", str(model_out), "--count", "5",
        "--out", str(tmp_path / "s.csv"),
    ])
    assert code == 1
    capsys.readouterr()


def test_cli_marginals_writes_grid(small_csv, tmp_path, capsys):
    out = tmp_path / "marg.csv"
    assert main([
        "marginals", "--data", str(small_csv), "--grid-points", "33",
        "--out", str(out),
    ]) == 0
    capsys.readouterr()
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 * 33
    by_col = {}
    for r in rows:
        by_col.setdefault(r["column"], []).append(r)
    for name, col_rows in by_col.items():
        cdf = np.array([float(r["cdf"]) for r in col_rows])
        assert (np.diff(cdf) >= 0).all(), name
        assert cdf[0] < 0.05 and cdf[-1] > 0.95


def test_cli_exit_codes(small_csv, tmp_path, capsys):
    # usage: no command
    assert main([]) == 1
    # usage: missing required flag
    assert main(["fit", "--data", str(small_csv)]) == 1
    # usage: unknown model kind in benchmark list
    assert main([
        "benchmark", "--data", str(small_csv), "--model", "cbn,mystery",
        "--out", str(tmp_path / "x.csv"),
    ]) == 1
    # usage: bad fraction
    assert main([
        "fit", "--data", str(small_csv), "--missing-fraction", "1.5",
        "--out", str(tmp_path / "m.json"),
    ]) == 1
    # data: nonexistent file
    assert main([
        "fit", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m.json"),
    ]) == 2
    # data: unparseable CSV
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1.0,2.0\n3.0,oops\n")
    assert main(["fit", "--data", str(bad), "--out", str(tmp_path / "m.json")]) == 2
    # data: model/dataset column mismatch
    model_out = tmp_path / "model.json"
    assert main([
        "fit", "--data", str(small_csv), "--max-parents", "1", "--out", str(model_out),
    ]) == 0
    other = tmp_path / "other.csv"
    other.write_text("p,q\n1.0,2.0\n2.0,1.0\n0.5,0.7\n")
    assert main([
        "eval", "--model-file", str(model_out), "--data", str(other),
    ]) == 2
    # numerical: collinear parent candidates break the linear-Gaussian fit
    # (c depends on the duplicated signal, so the search scores c | {a, b})
    rng = np.random.default_rng(5)
    x = rng.normal(size=40)
    c_col = x + 0.1 * rng.normal(size=40)
    dup = tmp_path / "dup.csv"
    with open(dup, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a", "b", "c"])
        for i in range(40):
            writer.writerow([repr(float(x[i])), repr(float(x[i])), repr(float(c_col[i]))])
    assert main([
        "fit", "--data", str(dup), "--model", "lgbn", "--max-parents", "2",
        "--out", str(tmp_path / "m.json"),
    ]) == 3
    capsys.readouterr()


def test_cli_help_and_version_exit_zero(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--help"])
    assert info.value.code == 0
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    capsys.readouterr()
