"""
Replicated experiments on imbalanced samples of a labeled source, and the
merge-decision study that compares critical-value strategies.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations_with_replacement
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from . import config
from .data import DataMatrix, LabeledDataset, make_rng, sample_imbalanced, spawn_seeds, standardize
from .errors import BenchError
from .evaluation import evaluate
from .initcluster import Partition
from .log import log_event
from .merge import closest_pair, merge_test
from .neighbors import pairwise_distances
from .pipeline import cluster_dataset, dump_json
from .schemas import BenchSpec, MergeConfig, RunConfig, SamplingSpec

logger = logging.getLogger(__name__)


def _design(sizes: Sequence[int], replications: int = 10) -> SamplingSpec:
    return SamplingSpec(group_sizes=list(sizes), replications=replications, seed=config.SEED)


PRESETS: Dict[str, BenchSpec] = {
    "audio": BenchSpec(name="audio", source="audio.csv",
                       sampling=_design([100, 75, 50, 4, 3, 3, 2, 2, 1, 1])),
    # the audio design drawn from pen digits, for when the audio features are unavailable
    "audio-on-pen": BenchSpec(name="audio-on-pen", source="pendigits.csv",
                              sampling=_design([100, 75, 50, 4, 3, 3, 2, 2, 1, 1])),
    "kinit": BenchSpec(name="kinit", source="audio.csv",
                       sampling=_design([100, 75, 50, 4, 3, 2, 1])),
    "pen": BenchSpec(name="pen", source="pendigits.csv", small_threshold=40,
                     sampling=_design([1000, 750, 500, 40, 30, 30, 20, 20, 10, 10])),
    "har": BenchSpec(name="har", source="har.csv",
                     sampling=_design([200, 150, 100, 8, 6, 4])),
    "satellite": BenchSpec(name="satellite", source="satellite.csv", small_threshold=12,
                           sampling=_design([300, 225, 150, 12, 9, 3])),
    "pen-balanced": BenchSpec(name="pen-balanced", source="pendigits-train.csv"),
}

STAGES = ("initial", "final", "singletons", "one_cluster")


@dataclass
class BenchResult:
    spec: BenchSpec
    long: pd.DataFrame
    aggregate: Dict

    def write(self, out_dir) -> Dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"long": out / f"{self.spec.name}_long.csv",
                 "aggregate": out / f"{self.spec.name}_aggregate.json"}
        self.long.to_csv(paths["long"], index=False, lineterminator="\n")
        paths["aggregate"].write_bytes(dump_json(self.aggregate))
        return paths


def resolve_source(spec: BenchSpec, source: Optional[Path] = None) -> Path:
    path = Path(source) if source else Path(config.DATA_DIR) / spec.source
    if not path.is_file():
        raise BenchError(f"preset '{spec.name}' needs dataset {path}, which is missing",
                         preset=spec.name, path=str(path))
    return path


def build_datasets(source: LabeledDataset, spec: BenchSpec) -> List[LabeledDataset]:
    if spec.standardize_order == "before":
        source = source.with_matrix(standardize(source.matrix).matrix)
    if spec.sampling is None:
        return [source]
    return sample_imbalanced(source, spec.sampling)


def _replicate(job) -> List[dict]:
    r, ds, cfg, seed, small_threshold = job
    result = cluster_dataset(ds, cfg, seed=seed)
    truth = result.dataset.labels
    initial = evaluate(truth, result.initial.assignment, small_threshold)
    final = evaluate(truth, result.final.assignment, small_threshold, with_baselines=False)
    rows = []
    for stage, report in zip(STAGES, (initial, final, initial.baselines.singletons,
                                      initial.baselines.one_cluster)):
        for metric, value in report.metrics().items():
            rows.append({"replication": r, "n": report.n, "stage": stage,
                         "metric": metric, "value": value})
    log_event(logger, logging.INFO, "replication_done", replication=r, n=result.dataset.matrix.n,
              k_init=result.k_init, k_final=result.final.k)
    return rows


def aggregate(long: pd.DataFrame) -> Dict:
    out: Dict = {}
    values = pd.to_numeric(long["value"], errors="coerce")
    for (stage, metric), v in values.groupby([long["stage"], long["metric"]], sort=True):
        v = v.dropna()
        stats = {"n": int(v.size), "median": None, "q1": None, "q3": None}
        if v.size:
            stats.update(median=float(v.median()), q1=float(v.quantile(0.25)),
                         q3=float(v.quantile(0.75)))
        out.setdefault(stage, {})[metric] = stats
    return out


def run_bench(spec: BenchSpec, cfg: RunConfig, source: LabeledDataset,
              workers: int = config.THREADS) -> BenchResult:
    """
    Replication r always gets the same data and the same clustering seed,
    whatever the number of workers.
    """
    datasets = build_datasets(source, spec)
    run_cfg = cfg.model_copy(update={"standardize": spec.standardize_order == "after"})
    seeds = spawn_seeds(cfg.seed, len(datasets), stream=1)
    jobs = [(r, ds, run_cfg, seeds[r], spec.small_threshold) for r, ds in enumerate(datasets)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            chunks = list(pool.map(_replicate, jobs))
    else:
        chunks = [_replicate(job) for job in jobs]
    long = pd.DataFrame([row for chunk in chunks for row in chunk],
                        columns=["replication", "n", "stage", "metric", "value"])
    summary = {"preset": spec.model_dump(mode="json"), "replications": len(datasets),
               "config": run_cfg.model_dump(mode="json", exclude={"input", "out_dir"}),
               "metrics": aggregate(long)}
    return BenchResult(spec, long, summary)


DECISION_SIZES = (30, 25, 20, 15, 10, 5, 3, 1)


def decision_study(ds: LabeledDataset, sizes: Sequence[int] = DECISION_SIZES,
                   replications: int = 10, seed: int = config.SEED,
                   strategies: Sequence[str] = ("cv1", "cv2", "cv3", "cv4"),
                   q_caps: Sequence[int] = (5,)) -> pd.DataFrame:
    """
    For every pair of cluster sizes, sample two clusters from one group (they
    should merge) or from two groups (they should not), run both merging
    conditions on their closest points and record whether the decision is
    correct. One row per trial and setting.
    """
    labels = np.asarray(ds.labels)
    pools = {g: np.flatnonzero(labels == g) for g in ds.groups}
    if len(pools) < 2:
        raise BenchError("decision study needs a source with at least two groups")
    rng = make_rng(seed)
    rows = []
    for size_a, size_b in combinations_with_replacement(sorted(sizes, reverse=True), 2):
        for situation in ("same", "different"):
            for r in range(replications):
                if situation == "same":
                    eligible = [g for g, idx in pools.items() if idx.size >= size_a + size_b]
                    if not eligible:
                        raise BenchError(f"no group holds {size_a + size_b} rows")
                    g = eligible[int(rng.integers(len(eligible)))]
                    drawn = rng.choice(pools[g], size=size_a + size_b, replace=False)
                    a_rows, b_rows = drawn[:size_a], drawn[size_a:]
                else:
                    eligible = [g for g, idx in pools.items() if idx.size >= max(size_a, size_b)]
                    if len(eligible) < 2:
                        raise BenchError(f"fewer than two groups hold {max(size_a, size_b)} rows")
                    g1, g2 = (eligible[i] for i in rng.choice(len(eligible), size=2, replace=False))
                    a_rows = rng.choice(pools[g1], size=size_a, replace=False)
                    b_rows = rng.choice(pools[g2], size=size_b, replace=False)
                rows.extend(_decide(ds, a_rows, b_rows, situation, r, strategies, q_caps))
    log_event(logger, logging.INFO, "decision_study_done", trials=len(rows))
    return pd.DataFrame(rows)


def _decide(ds: LabeledDataset, a_rows, b_rows, situation: str, r: int,
            strategies: Sequence[str], q_caps: Sequence[int]) -> List[dict]:
    x = DataMatrix(ds.matrix.values[np.concatenate([a_rows, b_rows])])
    dm = pairwise_distances(x)
    part = Partition([0] * len(a_rows) + [1] * len(b_rows))
    pair = closest_pair(part, dm)
    host_a, host_b = part.members(0), part.members(1)
    out = []
    for strategy in strategies:
        for cap in q_caps:
            cfg = MergeConfig(q_max_cap=cap, cv_strategy=strategy)
            merged = (merge_test(dm, host_a, pair.p, cfg).passed
                      and merge_test(dm, host_b, pair.o, cfg).passed)
            out.append({"size_a": len(a_rows), "size_b": len(b_rows), "situation": situation,
                        "replication": r, "strategy": strategy, "q_max_cap": cap,
                        "merged": merged, "correct": merged == (situation == "same")})
    return out


def decision_summary(trials: pd.DataFrame) -> pd.DataFrame:
    """Percentage of correct decisions per size pair, situation and setting."""
    grouped = trials.groupby(["situation", "strategy", "q_max_cap", "size_a", "size_b"], sort=True)
    return (grouped["correct"].mean() * 100.0).rename("percent_correct").reset_index()
