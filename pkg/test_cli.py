#!/usr/bin/env python3
"""
Command-line tests through click's runner.
"""
import sys
sys.path.insert(0, '.')

import tempfile
from pathlib import Path

import orjson
import pandas as pd
from click.testing import CliRunner

from iclust.cli import main
from iclust.data import synthetic_blobs


def _toy(tmp: Path) -> Path:
    ds = synthetic_blobs([40, 15, 6], [[0, 0], [12, 0], [0, 12]], seed=13)
    path = tmp / "toy.csv"
    ds.to_frame("label").to_csv(path, index=False)
    return path


def _labels(path: Path, labels) -> Path:
    pd.DataFrame({"row_index": range(len(labels)), "id": labels}).to_csv(path, index=False)
    return path


def test_version_names_defaults():
    result = CliRunner().invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "cv1" in result.output and "q_max=5" in result.output and "ward" in result.output


def test_cluster_writes_artifacts():
    tmp = Path(tempfile.mkdtemp())
    out = tmp / "out"
    result = CliRunner().invoke(main, ["cluster", str(_toy(tmp)), "--label-column", "label",
                                       "-o", str(out)])
    assert result.exit_code == 0, result.output
    summary = orjson.loads((out / "summary.json").read_bytes())
    assert summary["final_report"]["homogeneity"] == 1.0
    assert summary["k_init"] == 42
    assert (out / "assignment.csv").is_file() and (out / "trace.jsonl").is_file()


def test_cluster_k_init_one():
    tmp = Path(tempfile.mkdtemp())
    out = tmp / "out"
    result = CliRunner().invoke(main, ["cluster", str(_toy(tmp)), "--label-column", "label",
                                       "--k-init", "1", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "trace.jsonl").read_bytes() == b""
    assert pd.read_csv(out / "assignment.csv")["cluster_id"].nunique() == 1


def test_cluster_missing_input():
    missing = Path(tempfile.mkdtemp()) / "absent.csv"
    result = CliRunner().invoke(main, ["cluster", str(missing)])
    assert result.exit_code == 1
    assert "DataError" in result.output and str(missing) in result.output


def test_cluster_bad_option_is_a_usage_error():
    tmp = Path(tempfile.mkdtemp())
    result = CliRunner().invoke(main, ["cluster", str(_toy(tmp)), "--q-max", "0"])
    assert result.exit_code == 2
    assert "ValidationError" in result.output


def test_lof_command():
    tmp = Path(tempfile.mkdtemp())
    out = tmp / "lof.csv"
    result = CliRunner().invoke(main, ["lof", str(_toy(tmp)), "--label-column", "label",
                                       "--q-max", "3", "-o", str(out)])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["row_index", "lof_1", "lof_2", "lof_3", "representative"]
    assert len(frame) == 61


def test_eval_perfect_and_one_cluster():
    tmp = Path(tempfile.mkdtemp())
    truth = _labels(tmp / "truth.csv", ["a", "a", "a", "b"])
    same = CliRunner().invoke(main, ["eval", str(truth), str(truth)])
    assert same.exit_code == 0, same.output
    report = orjson.loads(same.output)
    assert report["purity"] == report["f_measure"] == report["v_measure"] == 1.0
    assert report["baselines"]["one_cluster"]["completeness"] == 1.0

    pred = _labels(tmp / "pred.csv", [7, 7, 7, 7])
    one = orjson.loads(CliRunner().invoke(main, ["eval", str(pred), str(truth)]).output)
    assert abs(one["f_measure"] - 0.742857142857) < 1e-9
    assert one["completeness"] == 1.0


def test_eval_row_mismatch():
    tmp = Path(tempfile.mkdtemp())
    truth = _labels(tmp / "truth.csv", ["a", "b", "b"])
    pred = _labels(tmp / "pred.csv", [0, 1])
    result = CliRunner().invoke(main, ["eval", str(pred), str(truth)])
    assert result.exit_code == 1 and "EvaluationError" in result.output


def test_sample_command():
    tmp = Path(tempfile.mkdtemp())
    out = tmp / "samples"
    result = CliRunner().invoke(main, ["sample", str(_toy(tmp)), "--sizes", "5,3,1",
                                       "--replications", "2", "-o", str(out)])
    assert result.exit_code == 0, result.output
    files = sorted(out.glob("sample_*.csv"))
    assert [f.name for f in files] == ["sample_00.csv", "sample_01.csv"]
    assert len(pd.read_csv(files[0])) == 9


def test_bench_needs_exactly_one_design():
    result = CliRunner().invoke(main, ["bench"])
    assert result.exit_code == 2


def test_bench_custom_design():
    tmp = Path(tempfile.mkdtemp())
    out = tmp / "bench"
    result = CliRunner().invoke(main, ["bench", "--sizes", "6,5,3", "--source", str(_toy(tmp)),
                                       "--replications", "2", "--k-init", "3", "-o", str(out)])
    assert result.exit_code == 0, result.output
    agg = orjson.loads((out / "custom_aggregate.json").read_bytes())
    assert agg["replications"] == 2
    assert "final" in agg["metrics"]


def test_bench_preset_without_data():
    result = CliRunner().invoke(main, ["bench", "--preset", "har", "--source",
                                       str(Path(tempfile.mkdtemp()) / "har.csv")])
    assert result.exit_code == 1 and "BenchError" in result.output


def test_decide_command():
    tmp = Path(tempfile.mkdtemp())
    out = tmp / "decide"
    result = CliRunner().invoke(main, ["decide", str(_toy(tmp)), "--sizes", "5,3",
                                       "--replications", "2", "-o", str(out)])
    assert result.exit_code == 0, result.output
    summary = pd.read_csv(out / "decision_summary.csv")
    assert set(summary["strategy"]) == {"cv1", "cv2", "cv3", "cv4"}


def test_bench_preset_validates_overrides():
    tmp = Path(tempfile.mkdtemp())
    toy = str(_toy(tmp))
    for flags in (["--replications", "0"], ["--seed", "-1"]):
        result = CliRunner().invoke(main, ["bench", "--preset", "audio-on-pen", "--source", toy,
                                           *flags, "-o", str(tmp / "bench")])
        assert result.exit_code == 2, (flags, result.output)
        assert "ValidationError" in result.output
        assert not (tmp / "bench").exists()


def test_lof_single_q_keeps_representative():
    tmp = Path(tempfile.mkdtemp())
    out = tmp / "lof.csv"
    result = CliRunner().invoke(main, ["lof", str(_toy(tmp)), "--label-column", "label",
                                       "--q", "4", "-o", str(out)])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["row_index", "lof_4", "representative"]
    assert (frame["lof_4"] == frame["representative"]).all()

    full = tmp / "full.csv"
    CliRunner().invoke(main, ["lof", str(_toy(tmp)), "--label-column", "label",
                              "--q-max", "4", "-o", str(full)])
    assert (pd.read_csv(full)["lof_4"] - frame["lof_4"]).abs().max() < 1e-12


if __name__ == "__main__":
    from testkit import run_tests
    run_tests(globals())
