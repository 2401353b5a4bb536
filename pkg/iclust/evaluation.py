"""
External clustering-quality measures computed from a groups x clusters
contingency table.

The weighted small/big-group measures are a reconstruction: for every
ground-truth group the best-matching cluster (highest F, ties to the first
cluster in sorted label order) gives that group's precision, recall and F;
each category (small: size <= threshold, big: size > threshold) reports the
size-weighted mean over its groups, or None when it has no group.
"""
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import xlogy

from . import config
from .errors import EvaluationError
from .schemas import EvaluationReport, ExtremeBaselines


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    group_labels: Tuple[str, ...] = ()
    cluster_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.ndim != 2 or c.size == 0 or (c < 0).any():
            raise EvaluationError("contingency table must be a nonempty nonnegative matrix")
        if c.sum() < 1:
            raise EvaluationError("contingency table is empty")
        # empty groups or clusters carry no information
        rows, cols = c.sum(axis=1) > 0, c.sum(axis=0) > 0
        if self.group_labels:
            object.__setattr__(self, "group_labels",
                               tuple(g for g, keep in zip(self.group_labels, rows) if keep))
        if self.cluster_labels:
            object.__setattr__(self, "cluster_labels",
                               tuple(k for k, keep in zip(self.cluster_labels, cols) if keep))
        object.__setattr__(self, "counts", c[rows][:, cols].astype(np.float64))

    @classmethod
    def from_labels(cls, truth: Sequence, pred: Sequence) -> "ContingencyTable":
        truth = np.asarray([str(t) for t in truth])
        pred = np.asarray([str(p) for p in pred])
        if truth.size != pred.size:
            raise EvaluationError(f"{truth.size} truth labels vs {pred.size} predicted labels")
        if truth.size == 0:
            raise EvaluationError("no observations to evaluate")
        groups, gi = np.unique(truth, return_inverse=True)
        clusters, ci = np.unique(pred, return_inverse=True)
        counts = np.zeros((groups.size, clusters.size), dtype=np.int64)
        np.add.at(counts, (gi.ravel(), ci.ravel()), 1)
        return cls(counts, tuple(groups), tuple(clusters))

    @property
    def n(self) -> float:
        return float(self.counts.sum())

    @property
    def group_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def cluster_sizes(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def purity(t: ContingencyTable) -> float:
    return float(t.counts.max(axis=0).sum() / t.n)


def _entropy(sizes: np.ndarray, n: float) -> float:
    return float(-xlogy(sizes / n, sizes / n).sum())


def v_measure(t: ContingencyTable) -> Tuple[float, float, float]:
    """(homogeneity, completeness, V) with natural-log entropies."""
    n = t.n
    h_g = _entropy(t.group_sizes, n)
    h_k = _entropy(t.cluster_sizes, n)
    joint = t.counts / n
    h_g_given_k = float(-xlogy(joint, t.counts / np.maximum(t.cluster_sizes, 1)[None, :]).sum())
    h_k_given_g = float(-xlogy(joint, t.counts / np.maximum(t.group_sizes, 1)[:, None]).sum())
    homogeneity = 1.0 if h_g == 0 else 1.0 - h_g_given_k / h_g
    completeness = 1.0 if h_k == 0 else 1.0 - h_k_given_g / h_k
    homogeneity = min(max(homogeneity, 0.0), 1.0)
    completeness = min(max(completeness, 0.0), 1.0)
    denom = homogeneity + completeness
    v = 2.0 * homogeneity * completeness / denom if denom > 0 else 0.0
    return homogeneity, completeness, v


def _f_matrix(t: ContingencyTable) -> np.ndarray:
    # harmonic mean of precision n_gk/|k| and recall n_gk/|g| reduces to 2 n_gk / (|g| + |k|)
    return 2.0 * t.counts / (t.group_sizes[:, None] + t.cluster_sizes[None, :])


def f_measure(t: ContingencyTable) -> float:
    return float((t.group_sizes / t.n * _f_matrix(t).max(axis=1)).sum())


class GroupMeasures(NamedTuple):
    wf_big: Optional[float]
    wpr_big: Optional[float]
    wre_big: Optional[float]
    wf_small: Optional[float]
    wpr_small: Optional[float]
    wre_small: Optional[float]


def weighted_group_measures(t: ContingencyTable,
                            small_threshold: int = config.SMALL_THRESHOLD) -> GroupMeasures:
    sizes = t.group_sizes
    best = _f_matrix(t).argmax(axis=1)
    rows = np.arange(sizes.size)
    overlap = t.counts[rows, best]
    precision = overlap / t.cluster_sizes[best]
    recall = overlap / sizes
    f = _f_matrix(t)[rows, best]

    def category(mask: np.ndarray):
        if not mask.any():
            return None, None, None
        w = sizes[mask] / sizes[mask].sum()
        return (float((w * f[mask]).sum()), float((w * precision[mask]).sum()),
                float((w * recall[mask]).sum()))

    big = category(sizes > small_threshold)
    small = category(sizes <= small_threshold)
    return GroupMeasures(*big, *small)


def evaluate(truth: Sequence, pred: Sequence, small_threshold: int = config.SMALL_THRESHOLD,
             with_baselines: bool = True) -> EvaluationReport:
    t = ContingencyTable.from_labels(truth, pred)
    h, c, v = v_measure(t)
    report = EvaluationReport(
        n=int(t.n), k_detected=t.counts.shape[1], k_true=t.counts.shape[0],
        small_threshold=small_threshold, purity=purity(t), f_measure=f_measure(t),
        v_measure=v, homogeneity=h, completeness=c,
        **weighted_group_measures(t, small_threshold)._asdict())
    if with_baselines:
        singletons, one_cluster = extreme_baselines(truth, small_threshold)
        report.baselines = ExtremeBaselines(singletons=singletons, one_cluster=one_cluster)
    return report


def extreme_baselines(labels: Sequence, small_threshold: int = config.SMALL_THRESHOLD
                      ) -> Tuple[EvaluationReport, EvaluationReport]:
    """Reports for the all-singletons and the one-cluster solutions."""
    labels = list(labels)
    if not labels:
        raise EvaluationError("labels must be nonempty")
    n = len(labels)
    singletons = evaluate(labels, range(n), small_threshold, with_baselines=False)
    one_cluster = evaluate(labels, [0] * n, small_threshold, with_baselines=False)
    return singletons, one_cluster
