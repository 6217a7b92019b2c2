"""Benchmark harness: the split/mask/fit/score grid.

For every (model kind, parent cap, missing fraction, split) cell the
harness masks the training half, learns structure and parameters, and
scores train and test sets by average log-probability per instance —
the copula model by its exact density on complete rows and its likelihood
bound on rows with hidden cells, the linear-Gaussian baseline by its exact
observed-coordinate marginal.

Results go to a CSV whose bytes are a pure function of the inputs and base
seed; wall-clock timings and environment info go to a JSON manifest
sidecar next to it (the one deliberately non-deterministic output).
"""

import json
import sys
import time
from dataclasses import dataclass

import numpy as np
import scipy

from . import __version__
from .cbn import CbnModel, fit_missing, lower_bound_rows
from .data import (
    SEED_TAG_MASK_TEST,
    SEED_TAG_MASK_TRAIN,
    apply_missing_mask,
    derive_seed,
    load_csv,
    make_split,
)
from .errors import InvalidInputError
from .gaussian_bn import em_fit_lg, log_marginal_lg_rows
from .structure import SearchConfig, greedy_search

__all__ = [
    "BenchmarkRow",
    "BenchmarkAggregate",
    "BenchmarkResult",
    "run_benchmark",
    "fit_model",
    "score_rows",
    "mask_seed_for",
]

MODEL_KINDS = ("cbn", "lgbn")


@dataclass(frozen=True)
class BenchmarkRow:
    """One grid cell on one split; scores are per-instance averages."""

    model_kind: str
    max_parents: int
    missing_fraction: float
    split_index: int
    train_score: float
    test_score: float
    base_seed: int
    mask_seed_train: int
    mask_seed_test: int
    wall_seconds: float


@dataclass(frozen=True)
class BenchmarkAggregate:
    """Across-split mean and 10-90 percentile range for one configuration."""

    model_kind: str
    max_parents: int
    missing_fraction: float
    train_mean: float
    train_p10: float
    train_p90: float
    test_mean: float
    test_p10: float
    test_p90: float


@dataclass(frozen=True)
class BenchmarkResult:
    rows: tuple
    aggregates: tuple

    def csv_text(self):
        """Deterministic CSV: per-split rows then aggregate rows."""
        lines = [
            "row_kind,model_kind,max_parents,missing_fraction,split_index,"
            "train_score,test_score,train_p10,train_p90,test_p10,test_p90,"
            "base_seed,mask_seed_train,mask_seed_test"
        ]
        for r in self.rows:
            lines.append(
                f"split,{r.model_kind},{r.max_parents},{_fmt(r.missing_fraction)},{r.split_index},"
                f"{_fmt(r.train_score)},{_fmt(r.test_score)},,,,,"
                f"{r.base_seed},{r.mask_seed_train},{r.mask_seed_test}"
            )
        for a in self.aggregates:
            lines.append(
                f"aggregate,{a.model_kind},{a.max_parents},{_fmt(a.missing_fraction)},,"
                f"{_fmt(a.train_mean)},{_fmt(a.test_mean)},{_fmt(a.train_p10)},{_fmt(a.train_p90)},"
                f"{_fmt(a.test_p10)},{_fmt(a.test_p90)},,,"
            )
        return "\n".join(lines) + "\n"

    def aggregate_for(self, model_kind, max_parents, missing_fraction):
        for a in self.aggregates:
            if (
                a.model_kind == model_kind
                and a.max_parents == max_parents
                and a.missing_fraction == missing_fraction
            ):
                return a
        raise KeyError((model_kind, max_parents, missing_fraction))


def _fmt(x):
    return repr(float(x))


def mask_seed_for(base_seed, split_index, missing_fraction, role):
    """Deterministic per-(split, role, fraction) mask seed."""
    if role == "train":
        tag = SEED_TAG_MASK_TRAIN
    elif role == "test":
        tag = SEED_TAG_MASK_TEST
    else:
        raise InvalidInputError(f"role must be 'train' or 'test', got {role!r}")
    return derive_seed(base_seed, tag, split_index, int(round(missing_fraction * 1_000_000)))


def fit_model(train, model_kind, config):
    """Learn structure on the (possibly masked) training half, then parameters."""
    structure = greedy_search(train, config, model_kind=model_kind)
    if model_kind == "cbn":
        return fit_missing(train, structure.dag, quad_nodes=config.quad_nodes)
    return em_fit_lg(train, structure.dag)


def score_rows(model, data, quad_nodes=8):
    """Per-instance scores under either model kind."""
    if isinstance(model, CbnModel):
        return lower_bound_rows(model, data, quad_nodes=quad_nodes)
    return log_marginal_lg_rows(model, data)


def _run_cell(data, protocol, model_kind, max_parents, missing_fraction, split_index, quad_nodes):
    train, test = make_split(data, protocol, split_index)
    seed_train = mask_seed_for(protocol.base_seed, split_index, missing_fraction, "train")
    seed_test = mask_seed_for(protocol.base_seed, split_index, missing_fraction, "test")
    train_m = apply_missing_mask(train, missing_fraction, seed_train)
    if protocol.mask_scope == "train_and_test":
        test_m = apply_missing_mask(test, missing_fraction, seed_test)
    else:
        test_m = test
    config = SearchConfig(max_parents=max_parents, quad_nodes=quad_nodes)
    model = fit_model(train_m, model_kind, config)
    train_score = float(score_rows(model, train_m, quad_nodes).mean())
    test_score = float(score_rows(model, test_m, quad_nodes).mean())
    return train_score, test_score, seed_train, seed_test


def run_benchmark(
    dataset_path,
    protocol,
    model_kinds,
    max_parents_list,
    missing_fractions,
    output_path,
    quad_nodes=8,
):
    """Run the full grid and write CSV + manifest.

    Rows are produced in canonical order (model kind, parent cap, missing
    fraction, split); the CSV is byte-identical across reruns with the same
    inputs and seed.  On a failing cell, everything finished so far is
    flushed to ``output_path`` before the error propagates with the cell
    identified.
    """
    model_kinds = tuple(model_kinds)
    max_parents_list = tuple(int(k) for k in max_parents_list)
    missing_fractions = tuple(float(p) for p in missing_fractions)
    if not model_kinds or not max_parents_list or not missing_fractions:
        raise InvalidInputError("benchmark grids must be non-empty")
    for kind in model_kinds:
        if kind not in MODEL_KINDS:
            raise InvalidInputError(f"unknown model kind {kind!r}")

    data = load_csv(dataset_path)
    rows = []
    timings = []
    started = time.time()
    try:
        for model_kind in model_kinds:
            for max_parents in max_parents_list:
                for p in missing_fractions:
                    for split_index in range(protocol.num_splits):
                        t0 = time.time()
                        try:
                            train_score, test_score, seed_train, seed_test = _run_cell(
                                data, protocol, model_kind, max_parents, p, split_index, quad_nodes
                            )
                        except Exception as e:
                            raise RuntimeError(
                                f"benchmark cell failed (model={model_kind}, "
                                f"max_parents={max_parents}, missing_fraction={p}, "
                                f"split={split_index}): {e}"
                            ) from e
                        wall = time.time() - t0
                        rows.append(
                            BenchmarkRow(
                                model_kind=model_kind,
                                max_parents=max_parents,
                                missing_fraction=p,
                                split_index=split_index,
                                train_score=train_score,
                                test_score=test_score,
                                base_seed=protocol.base_seed,
                                mask_seed_train=seed_train,
                                mask_seed_test=seed_test,
                                wall_seconds=wall,
                            )
                        )
                        timings.append(wall)
    except Exception:
        if output_path is not None and rows:
            partial = BenchmarkResult(rows=tuple(rows), aggregates=())
            with open(output_path, "w", encoding="utf-8") as fh:
                fh.write(partial.csv_text())
        raise

    aggregates = []
    for model_kind in model_kinds:
        for max_parents in max_parents_list:
            for p in missing_fractions:
                cell_rows = [
                    r
                    for r in rows
                    if r.model_kind == model_kind
                    and r.max_parents == max_parents
                    and r.missing_fraction == p
                ]
                train = np.array([r.train_score for r in cell_rows])
                test = np.array([r.test_score for r in cell_rows])
                aggregates.append(
                    BenchmarkAggregate(
                        model_kind=model_kind,
                        max_parents=max_parents,
                        missing_fraction=p,
                        train_mean=float(train.mean()),
                        train_p10=float(np.percentile(train, 10)),
                        train_p90=float(np.percentile(train, 90)),
                        test_mean=float(test.mean()),
                        test_p10=float(np.percentile(test, 10)),
                        test_p90=float(np.percentile(test, 90)),
                    )
                )
    result = BenchmarkResult(rows=tuple(rows), aggregates=tuple(aggregates))

    if output_path is not None:
        with open(output_path, "w", encoding="utf-8") as fh:
            fh.write(result.csv_text())
        manifest = {
            "dataset": str(dataset_path),
            "package_version": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "protocol": {
                "num_splits": protocol.num_splits,
                "split_fraction": protocol.split_fraction,
                "base_seed": protocol.base_seed,
                "mask_scope": protocol.mask_scope,
            },
            "grid": {
                "model_kinds": list(model_kinds),
                "max_parents_list": list(max_parents_list),
                "missing_fractions": list(missing_fractions),
                "quad_nodes": quad_nodes,
            },
            "note": "timings are wall-clock and vary between runs; the CSV is deterministic",
            "cell_wall_seconds": timings,
            "total_wall_seconds": time.time() - started,
        }
        with open(str(output_path) + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    return result
