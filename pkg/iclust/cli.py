"""
Command-line entry point.

    python -m iclust.cli cluster data.csv --label-column label -o out/
    python -m iclust.cli lof data.csv --q-max 5 -o lof.csv
    python -m iclust.cli eval out/assignment.csv truth.csv
    python -m iclust.cli sample pendigits.csv --sizes 100,75,50,4,3,3,2,2,1,1 -o samples/
    python -m iclust.cli bench --preset pen --workers 4 -o bench/
    python -m iclust.cli decide pendigits.csv --label-column label -o decide/
"""
import functools
import logging
import sys
from pathlib import Path
from typing import List, Optional

import click
import numpy as np
import orjson
import pandas as pd
from pydantic import ValidationError

from . import __version__, config
from .bench import PRESETS, decision_study, decision_summary, resolve_source, run_bench
from .data import load_csv, sample_imbalanced, standardize
from .errors import DataError, EvaluationError, IClustError
from .evaluation import evaluate
from .lof import lof_profile, lof_scores
from .log import setup_logging
from .neighbors import pairwise_distances
from .pipeline import cluster_dataset, dump_json, summarize, write_artifacts
from .schemas import BenchSpec, RunConfig, SamplingSpec

logger = logging.getLogger(__name__)


def _fail(record: dict, code: int) -> None:
    click.echo(orjson.dumps(record, option=orjson.OPT_SORT_KEYS, default=str).decode(), err=True)
    sys.exit(code)


def reports_errors(fn):
    """Turn library and validation errors into a JSON record on stderr and a nonzero exit."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as e:
            _fail({"error": "ValidationError", "message": str(e)}, 2)
        except IClustError as e:
            _fail(e.to_record(), 1)
    return wrapper


def _sizes(value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(s) for s in value.split(",") if s.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'")


@click.group()
@click.version_option(__version__, message=f"%(prog)s %(version)s ({config.provenance()})")
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG.")
def main(verbose: int):
    """IClust: over-cluster, then merge with two-sided LOF tests."""
    level = {0: config.LOG_LEVEL, 1: logging.INFO}.get(verbose, logging.DEBUG)
    setup_logging(level)


@main.command()
@click.argument("input", type=click.Path(path_type=Path))
@click.option("--label-column", default=None, help="Ground-truth column; enables evaluation.")
@click.option("--no-standardize", is_flag=True)
@click.option("--init", "init_method", default=config.DEFAULT_INIT, show_default=True,
              type=click.Choice(["ward", "complete", "single", "kmeans", "external"]))
@click.option("--k-init", default=config.DEFAULT_K_INIT, show_default=True,
              help="log5 | log10 | log15 | quarter | auto | an integer.")
@click.option("--q-max", default=config.DEFAULT_Q_MAX, show_default=True, type=int)
@click.option("--cv", default=config.DEFAULT_CV, show_default=True,
              type=click.Choice(["cv1", "cv2", "cv3", "cv4"]))
@click.option("--multiplier", default=config.CV_MULTIPLIER, show_default=True, type=float)
@click.option("--seed", default=config.SEED, show_default=True, type=int)
@click.option("--initial-partition", type=click.Path(path_type=Path), default=None,
              help="row_index,cluster_id CSV for --init external.")
@click.option("--small-threshold", default=config.SMALL_THRESHOLD, show_default=True, type=int)
@click.option("-o", "--out-dir", default="iclust-out", show_default=True,
              type=click.Path(path_type=Path))
@reports_errors
def cluster(input, label_column, no_standardize, init_method, k_init, q_max, cv, multiplier,
            seed, initial_partition, small_threshold, out_dir):
    """Cluster INPUT and write assignment, trace and summary."""
    cfg = RunConfig(input=input, label_column=label_column, standardize=not no_standardize,
                    init_method=init_method, k_init=k_init, q_max=q_max, cv=cv,
                    multiplier=multiplier, seed=seed, initial_partition=initial_partition,
                    out_dir=out_dir)
    ds = load_csv(cfg.input, cfg.label_column)
    result = cluster_dataset(ds, cfg)
    summary = summarize(result, cfg, labeled=label_column is not None,
                        small_threshold=small_threshold)
    paths = write_artifacts(result, summary, cfg.out_dir)
    click.echo(f"k_init={summary.k_init} k_final={summary.k_final} "
               f"merges={summary.merges} rejections={summary.rejections}")
    for path in paths.values():
        click.echo(f"  wrote {path}")


@main.command()
@click.argument("input", type=click.Path(path_type=Path))
@click.option("--label-column", default=None, help="Column to drop before scoring.")
@click.option("--q", "q_single", type=int, default=None, help="Score a single neighborhood size.")
@click.option("--q-max", type=int, default=config.DEFAULT_Q_MAX, show_default=True)
@click.option("--no-standardize", is_flag=True)
@click.option("-o", "--output", type=click.Path(path_type=Path), default=None,
              help="CSV destination; stdout when omitted.")
@reports_errors
def lof(input, label_column, q_single, q_max, no_standardize, output):
    """Score every row of INPUT with LOF, using the whole dataset as scope."""
    ds = load_csv(input, label_column)
    m = ds.matrix if no_standardize or ds.matrix.n < 2 else standardize(ds.matrix).matrix
    dm = pairwise_distances(m)
    if q_single is not None:
        # a one-value range: the representative is that score
        scores = lof_scores(dm, None, q_single)
        frame = pd.DataFrame({"row_index": np.arange(m.n), f"lof_{q_single}": scores,
                              "representative": scores})
    else:
        profile = lof_profile(dm, None, q_max)
        frame = pd.DataFrame(profile.scores, columns=[f"lof_{q}" for q in range(1, q_max + 1)])
        frame.insert(0, "row_index", np.arange(m.n))
        frame["representative"] = profile.representative
    text = frame.to_csv(index=False, lineterminator="\n")
    if output is None:
        click.echo(text, nl=False)
    else:
        output.write_text(text)
        click.echo(f"wrote {output}")


def _read_labels(path: Path) -> pd.Series:
    """row_index plus one label column, returned as strings indexed by row."""
    if not path.is_file():
        raise DataError(f"label file not found: {path}", path=str(path))
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise DataError(f"cannot parse {path}: {e}", path=str(path))
    if df.shape[1] < 2 or df.columns[0] != "row_index":
        raise DataError("label CSV needs columns row_index and a label column", path=str(path))
    rows = pd.to_numeric(df["row_index"], errors="coerce")
    if rows.isna().any() or rows.duplicated().any():
        raise DataError("row_index must hold distinct integers", path=str(path))
    return pd.Series(df.iloc[:, 1].to_numpy(), index=rows.astype(int).to_numpy()).sort_index()


@main.command("eval")
@click.argument("pred", type=click.Path(path_type=Path))
@click.argument("truth", type=click.Path(path_type=Path))
@click.option("--small-threshold", default=config.SMALL_THRESHOLD, show_default=True, type=int)
@click.option("-o", "--output", type=click.Path(path_type=Path), default=None)
@reports_errors
def evaluate_cmd(pred, truth, small_threshold, output):
    """Compare predicted clusters PRED with ground truth TRUTH (both row_index,<id> CSVs)."""
    p, t = _read_labels(pred), _read_labels(truth)
    if len(p) != len(t):
        raise EvaluationError(f"{len(p)} predicted rows vs {len(t)} truth rows")
    unknown = p.index.difference(t.index)
    if len(unknown):
        raise EvaluationError("predicted rows missing from truth", rows=[int(r) for r in unknown[:10]])
    report = evaluate(t.to_list(), p.reindex(t.index).to_list(), small_threshold)
    blob = dump_json(report.model_dump(mode="json"))
    if output is None:
        click.echo(blob.decode(), nl=False)
    else:
        output.write_bytes(blob)
        click.echo(f"wrote {output}")


@main.command()
@click.argument("input", type=click.Path(path_type=Path))
@click.option("--sizes", required=True, help="Comma-separated group sizes.")
@click.option("--label-column", default="label", show_default=True)
@click.option("--replications", default=10, show_default=True, type=int)
@click.option("--seed", default=config.SEED, show_default=True, type=int)
@click.option("--pin", default=None, help="Comma-separated labels, one per size.")
@click.option("-o", "--out-dir", default="samples", show_default=True,
              type=click.Path(path_type=Path))
@reports_errors
def sample(input, sizes, label_column, replications, seed, pin, out_dir):
    """Draw imbalanced datasets from the labeled INPUT."""
    spec = SamplingSpec(group_sizes=_sizes(sizes), replications=replications, seed=seed,
                        pinned_labels=pin.split(",") if pin else None)
    ds = load_csv(input, label_column)
    out_dir.mkdir(parents=True, exist_ok=True)
    for r, part in enumerate(sample_imbalanced(ds, spec)):
        path = out_dir / f"sample_{r:02d}.csv"
        part.to_frame(label_column).to_csv(path, index=False, lineterminator="\n")
        click.echo(f"wrote {path} (n={part.matrix.n})")


@main.command()
@click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None)
@click.option("--sizes", default=None, help="Custom design instead of a preset.")
@click.option("--source", type=click.Path(path_type=Path), default=None,
              help="Source CSV; defaults to the preset's file under ICLUST_DATA_DIR.")
@click.option("--label-column", default="label", show_default=True)
@click.option("--replications", default=10, show_default=True, type=int)
@click.option("--standardize-order", default="after", show_default=True,
              type=click.Choice(["after", "before", "none"]))
@click.option("--init", "init_method", default=config.DEFAULT_INIT, show_default=True,
              type=click.Choice(["ward", "complete", "single", "kmeans"]))
@click.option("--k-init", default=config.DEFAULT_K_INIT, show_default=True)
@click.option("--q-max", default=config.DEFAULT_Q_MAX, show_default=True, type=int)
@click.option("--cv", default=config.DEFAULT_CV, show_default=True,
              type=click.Choice(["cv1", "cv2", "cv3", "cv4"]))
@click.option("--seed", default=config.SEED, show_default=True, type=int)
@click.option("--small-threshold", default=None, type=int)
@click.option("--workers", default=config.THREADS, show_default=True, type=int)
@click.option("-o", "--out-dir", default="bench-out", show_default=True,
              type=click.Path(path_type=Path))
@reports_errors
def bench(preset, sizes, source, label_column, replications, standardize_order, init_method,
          k_init, q_max, cv, seed, small_threshold, workers, out_dir):
    """Run a replicated imbalanced-sampling experiment."""
    if (preset is None) == (sizes is None):
        raise click.UsageError("give exactly one of --preset or --sizes")
    if preset is not None:
        spec = PRESETS[preset]
        updates = {"standardize_order": standardize_order, "label_column": label_column}
        if spec.sampling is not None:
            updates["sampling"] = SamplingSpec.model_validate(
                {**spec.sampling.model_dump(), "seed": seed, "replications": replications})
    else:
        if source is None:
            raise click.UsageError("--sizes needs --source")
        spec = BenchSpec(name="custom", source=str(source), label_column=label_column,
                         sampling=SamplingSpec(group_sizes=_sizes(sizes),
                                               replications=replications, seed=seed))
        updates = {"standardize_order": standardize_order}
    if small_threshold is not None:
        updates["small_threshold"] = small_threshold
    spec = BenchSpec.model_validate({**spec.model_dump(), **updates})
    ds = load_csv(resolve_source(spec, source), spec.label_column)
    cfg = RunConfig(init_method=init_method, k_init=k_init, q_max=q_max, cv=cv, seed=seed)
    result = run_bench(spec, cfg, ds, workers=workers)
    for path in result.write(out_dir).values():
        click.echo(f"wrote {path}")


@main.command()
@click.argument("input", type=click.Path(path_type=Path))
@click.option("--label-column", default="label", show_default=True)
@click.option("--sizes", default=",".join(map(str, (30, 25, 20, 15, 10, 5, 3, 1))), show_default=True)
@click.option("--replications", default=10, show_default=True, type=int)
@click.option("--seed", default=config.SEED, show_default=True, type=int)
@click.option("--q-caps", default="5", show_default=True, help="Comma-separated q_max caps.")
@click.option("--no-standardize", is_flag=True)
@click.option("-o", "--out-dir", default="decide-out", show_default=True,
              type=click.Path(path_type=Path))
@reports_errors
def decide(input, label_column, sizes, replications, seed, q_caps, no_standardize, out_dir):
    """Share of correct merge decisions per critical-value strategy."""
    ds = load_csv(input, label_column)
    if not no_standardize:
        ds = ds.with_matrix(standardize(ds.matrix).matrix)
    trials = decision_study(ds, _sizes(sizes), replications, seed, q_caps=_sizes(q_caps))
    out_dir.mkdir(parents=True, exist_ok=True)
    trials.to_csv(out_dir / "decisions.csv", index=False, lineterminator="\n")
    decision_summary(trials).to_csv(out_dir / "decision_summary.csv", index=False,
                                    lineterminator="\n")
    click.echo(f"wrote {out_dir / 'decisions.csv'} ({len(trials)} trials)")


if __name__ == "__main__":
    main()
