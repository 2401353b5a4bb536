"""
End-to-end clustering run: standardize, distances, initial over-clustering,
merging, and the artifacts a run leaves behind.
"""
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

import orjson

from . import config
from .data import LabeledDataset, standardize
from .errors import PartitionError
from .evaluation import evaluate
from .initcluster import Partition, cut, hierarchical, k_init_for, kmeans, read_partition, write_partition
from .log import log_event
from .merge import MergeTrace, run, trace_to_jsonl
from .neighbors import DistanceMatrix, pairwise_distances
from .schemas import RunConfig, RunSummary

logger = logging.getLogger(__name__)

ASSIGNMENT_FILE = "assignment.csv"
INITIAL_FILE = "initial_assignment.csv"
TRACE_FILE = "trace.jsonl"
SUMMARY_FILE = "summary.json"


@dataclass
class ClusterResult:
    dataset: LabeledDataset
    distances: DistanceMatrix
    k_init: int
    trace: MergeTrace
    constant_columns: List[int] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def initial(self) -> Partition:
        return self.trace.initial

    @property
    def final(self) -> Partition:
        return self.trace.final


def initial_partition(ds: LabeledDataset, dm: DistanceMatrix, cfg: RunConfig, seed) -> Partition:
    n = ds.matrix.n
    if cfg.init_method == "external":
        return read_partition(cfg.initial_partition, n=n)
    k = k_init_for(cfg.k_init, n)
    if cfg.init_method == "kmeans":
        return kmeans(ds.matrix, k, seed, cfg.kmeans_max_iter)
    if n < 2:
        return Partition([0])
    return cut(hierarchical(dm, cfg.init_method), k)


def cluster_dataset(ds: LabeledDataset, cfg: RunConfig, seed=None) -> ClusterResult:
    """Run the whole pipeline on one dataset; `seed` overrides cfg.seed (int or SeedSequence)."""
    timings: Dict[str, float] = {}
    clock = time.perf_counter()
    constant: List[int] = []
    if cfg.standardize and ds.matrix.n >= 2:
        z = standardize(ds.matrix)
        ds = ds.with_matrix(z.matrix)
        constant = z.constant_columns
    dm = pairwise_distances(ds.matrix)
    timings["distances"] = time.perf_counter() - clock

    clock = time.perf_counter()
    initial = initial_partition(ds, dm, cfg, cfg.seed if seed is None else seed)
    if initial.n != ds.matrix.n:
        raise PartitionError(f"initial partition covers {initial.n} rows, data has {ds.matrix.n}")
    timings["initial"] = time.perf_counter() - clock

    clock = time.perf_counter()
    trace = run(dm, initial, cfg.merge_config())
    timings["merge"] = time.perf_counter() - clock
    log_event(logger, logging.INFO, "pipeline_done", n=ds.matrix.n, init=cfg.init_method,
              k_init=initial.k, k_final=trace.final.k)
    return ClusterResult(ds, dm, initial.k, trace, constant, timings)


def summarize(result: ClusterResult, cfg: RunConfig, labeled: bool,
              small_threshold: int = config.SMALL_THRESHOLD) -> RunSummary:
    summary = RunSummary(
        n=result.dataset.matrix.n, p=result.dataset.matrix.p, init_method=cfg.init_method,
        k_init=result.k_init, k_final=result.final.k, merges=result.trace.merges,
        rejections=result.trace.rejections, config=cfg.merge_config(),
        constant_columns=result.constant_columns, timings=result.timings)
    if labeled:
        truth = result.dataset.labels
        summary.initial_report = evaluate(truth, result.initial.assignment, small_threshold)
        summary.final_report = evaluate(truth, result.final.assignment, small_threshold)
    return summary


def write_artifacts(result: ClusterResult, summary: RunSummary, out_dir) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in (ASSIGNMENT_FILE, INITIAL_FILE, TRACE_FILE, SUMMARY_FILE)}
    write_partition(result.final.normalized(), paths[ASSIGNMENT_FILE])
    write_partition(result.initial.normalized(), paths[INITIAL_FILE])
    paths[TRACE_FILE].write_bytes(trace_to_jsonl(result.trace))
    paths[SUMMARY_FILE].write_bytes(dump_json(summary.model_dump(mode="json")))
    return paths


def dump_json(obj) -> bytes:
    return orjson.dumps(obj, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS
                        | orjson.OPT_SERIALIZE_NUMPY) + b"\n"
