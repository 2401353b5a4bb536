#!/usr/bin/env python3
"""
Tests for the replicated benchmark harness and the merge-decision study.

The pen-digits checks need the UCI files under ICLUST_DATA_DIR
(pendigits.csv for the imbalanced designs, pendigits-train.csv for the
balanced run) and are skipped otherwise.
"""
import sys
sys.path.insert(0, '.')

import tempfile
from pathlib import Path

import numpy as np
import orjson
import pandas as pd
import pytest

from iclust import config
from iclust.bench import (PRESETS, STAGES, decision_study, decision_summary, resolve_source,
                          run_bench)
from iclust.data import load_csv, synthetic_blobs
from iclust.errors import BenchError
from iclust.schemas import METRIC_NAMES, BenchSpec, RunConfig, SamplingSpec


def _source():
    centers = np.array([[0, 0], [15, 0], [0, 15], [15, 15], [30, 0]], dtype=float)
    return synthetic_blobs([60, 50, 40, 40, 40], centers, seed=21)


def _spec(replications=3):
    return BenchSpec(name="toy", source="toy.csv",
                     sampling=SamplingSpec(group_sizes=[30, 20, 4, 2], replications=replications,
                                           seed=5))


def test_preset_designs():
    totals = {name: spec.sampling.total for name, spec in PRESETS.items() if spec.sampling}
    assert totals["audio"] == 241
    assert totals["audio-on-pen"] == 241
    assert totals["pen"] == 2380
    assert totals["har"] == 468
    assert totals["satellite"] == 669
    assert totals["kinit"] == 235
    assert PRESETS["pen-balanced"].sampling is None
    assert all(spec.replications == 10 for spec in PRESETS.values() if spec.sampling)


def test_missing_source_is_reported():
    spec = PRESETS["har"]
    missing = Path(tempfile.mkdtemp()) / "har.csv"
    try:
        resolve_source(spec, missing)
    except BenchError as e:
        assert str(missing) in e.message and e.context["preset"] == "har"
        return
    raise AssertionError("missing dataset accepted")


def test_long_format_and_aggregate():
    result = run_bench(_spec(), RunConfig(k_init="log5"), _source())
    long = result.long
    assert len(long) == 3 * len(STAGES) * len(METRIC_NAMES)
    assert set(long["stage"]) == set(STAGES)
    assert set(long["n"]) == {56}
    singletons = long[(long["stage"] == "singletons") & (long["metric"] == "purity")]
    assert (singletons["value"] == 1.0).all()
    agg = result.aggregate["metrics"]
    assert agg["one_cluster"]["completeness"]["median"] == 1.0
    stats = agg["final"]["v_measure"]
    assert stats["q1"] <= stats["median"] <= stats["q3"]


def test_bench_is_deterministic_across_workers():
    spec, cfg = _spec(replications=4), RunConfig(k_init="log5")
    serial = run_bench(spec, cfg, _source(), workers=1)
    parallel = run_bench(spec, cfg, _source(), workers=2)
    pd.testing.assert_frame_equal(serial.long, parallel.long)
    a, b = Path(tempfile.mkdtemp()), Path(tempfile.mkdtemp())
    pa, pb = serial.write(a), parallel.write(b)
    assert pa["aggregate"].read_bytes() == pb["aggregate"].read_bytes()
    assert orjson.loads(pa["aggregate"].read_bytes())["replications"] == 4


def test_standardize_before_sampling():
    spec = _spec(replications=2).model_copy(update={"standardize_order": "before"})
    result = run_bench(spec, RunConfig(k_init="log5"), _source())
    assert result.aggregate["config"]["standardize"] is False


def test_decision_study_shape():
    trials = decision_study(_source(), sizes=(10, 5), replications=3, seed=1)
    assert len(trials) == 3 * 2 * 3 * 4
    summary = decision_summary(trials)
    assert set(summary["situation"]) == {"same", "different"}
    assert summary["percent_correct"].between(0, 100).all()


def test_decision_study_separates_groups():
    # two unit Gaussians ten standard deviations apart
    source = synthetic_blobs([200, 200], [[0, 0], [10, 0]], seed=31)
    trials = decision_study(source, sizes=(30, 25, 20, 15, 10, 5, 3), replications=10, seed=3,
                            strategies=("cv1",))
    same = trials[trials["situation"] == "same"]
    different = trials[trials["situation"] == "different"]
    assert len(same) == len(different) == 28 * 10
    assert same["merged"].mean() >= 0.8, same["merged"].mean()
    assert (~different["merged"]).mean() >= 0.8


def test_decision_study_needs_two_groups():
    try:
        decision_study(synthetic_blobs([20], [[0, 0]], seed=0), sizes=(5,), replications=1)
    except BenchError:
        return
    raise AssertionError("single-group source accepted")


def _pen(name: str):
    path = Path(config.DATA_DIR) / name
    if not path.is_file():
        pytest.skip(f"{path} not found")
    return load_csv(path, "label")


def test_missing_pen_files_are_skipped():
    saved = config.DATA_DIR
    config.DATA_DIR = tempfile.mkdtemp()
    try:
        _pen("pendigits.csv")
    except pytest.skip.Exception as e:
        assert "pendigits.csv" in e.msg
    else:
        raise AssertionError("missing pen-digits file did not skip")
    finally:
        config.DATA_DIR = saved


def test_imbalanced_pen_finds_small_groups():
    source = _pen("pendigits.csv")
    result = run_bench(PRESETS["pen"], RunConfig(), source, workers=config.THREADS)
    med = result.aggregate["metrics"]
    assert med["final"]["wf_small"]["median"] > med["singletons"]["wf_small"]["median"]
    assert med["final"]["wf_small"]["median"] > med["one_cluster"]["wf_small"]["median"]
    assert med["final"]["wf_big"]["median"] > med["one_cluster"]["wf_big"]["median"]


def test_audio_design_on_pen():
    source = _pen("pendigits.csv")
    result = run_bench(PRESETS["audio-on-pen"], RunConfig(), source, workers=config.THREADS)
    assert set(result.long["n"]) == {241}
    med = result.aggregate["metrics"]
    assert med["final"]["wf_small"]["median"] > med["one_cluster"]["wf_small"]["median"]


def test_balanced_pen_quality():
    source = _pen("pendigits-train.csv")
    result = run_bench(PRESETS["pen-balanced"], RunConfig(), source)
    final = result.aggregate["metrics"]["final"]
    assert abs(final["purity"]["median"] - 0.823) <= 0.07
    assert abs(final["v_measure"]["median"] - 0.769) <= 0.07
    assert abs(final["k_detected"]["median"] - 35) <= 15


if __name__ == "__main__":
    from testkit import run_tests
    run_tests(globals())
