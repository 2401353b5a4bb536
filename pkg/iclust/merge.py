"""
Merging procedure: repeatedly take the closest pair of clusters (single
linkage) and merge it when both LOF-based membership tests pass; a rejected
pair is skipped until one of its clusters changes.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import orjson
from scipy.stats import median_abs_deviation

from .errors import PartitionError
from .initcluster import Partition
from .lof import LofProfile, lof_profile
from .log import log_event
from .neighbors import DistanceMatrix
from .schemas import CvStrategy, MergeConfig, MergeEvent, MergeTest

logger = logging.getLogger(__name__)


class ClosestPair(NamedTuple):
    l: int
    m: int
    o: int
    p: int
    distance: float


class _ClusterLinkage:
    """Single-linkage distances between live clusters, updated in place on merge."""

    def __init__(self, part: Partition, dm: DistanceMatrix):
        if part.n != dm.n:
            raise PartitionError(f"partition covers {part.n} points, distances cover {dm.n}")
        self.dm = dm
        self.ids = part.ids
        self.pos = {cid: i for i, cid in enumerate(self.ids)}
        self.members = {cid: part.members(cid) for cid in self.ids}
        self.assignment = part.assignment.copy()
        k = len(self.ids)
        order = np.argsort(part.assignment, kind="stable")
        grouped = part.assignment[order]
        starts = np.flatnonzero(np.r_[True, grouped[1:] != grouped[:-1]])
        L = np.empty((k, k))
        for i, cid in enumerate(self.ids):
            nearest = dm.d[self.members[cid]][:, order].min(axis=0)
            L[i] = np.minimum.reduceat(nearest, starts)
        np.fill_diagonal(L, np.inf)
        self.L = L
        self.active = np.ones(k, dtype=bool)
        self.excluded = np.zeros((k, k), dtype=bool)
        self.upper = np.triu(np.ones((k, k), dtype=bool), 1)

    @property
    def k(self) -> int:
        return int(self.active.sum())

    def exclude(self, l: int, m: int) -> None:
        a, b = sorted((self.pos[l], self.pos[m]))
        self.excluded[a, b] = True

    def closest(self) -> Optional[ClosestPair]:
        live = self.active[:, None] & self.active[None, :] & self.upper & ~self.excluded
        masked = np.where(live, self.L, np.inf)
        flat = int(np.argmin(masked))
        a, b = divmod(flat, masked.shape[1])
        if not np.isfinite(masked[a, b]):
            return None
        l, m = self.ids[a], self.ids[b]
        A, B = self.members[l], self.members[m]
        sub = self.dm.d[np.ix_(A, B)]
        i, j = divmod(int(np.argmin(sub)), sub.shape[1])
        return ClosestPair(l, m, int(A[i]), int(B[j]), float(sub[i, j]))

    def merge(self, l: int, m: int) -> None:
        a, b = self.pos[l], self.pos[m]
        self.L[a] = np.minimum(self.L[a], self.L[b])
        self.L[:, a] = self.L[a]
        self.L[a, a] = np.inf
        self.active[b] = False
        self.excluded[a, :] = False
        self.excluded[:, a] = False
        self.members[l] = np.union1d(self.members[l], self.members.pop(m))
        self.assignment[self.assignment == m] = l


def closest_pair(part: Partition, dm: DistanceMatrix,
                 excluded: Iterable[Tuple[int, int]] = ()) -> Optional[ClosestPair]:
    if part.k < 2:
        raise PartitionError("closest_pair needs at least 2 clusters")
    state = _ClusterLinkage(part, dm)
    for l, m in excluded:
        state.exclude(l, m)
    return state.closest()


def critical_value(profile: LofProfile, strategy: CvStrategy = "cv1",
                   mad_scale: float = 1.4826, multiplier: float = 2.0) -> float:
    """
    cv1/cv2 pool LOF_q over all points and q; cv3/cv4 use the per-point
    representative values. Odd strategies are robust (median + scaled MAD),
    even ones classical (mean + sample std).
    """
    if strategy in ("cv1", "cv2"):
        values = profile.scores.ravel()
    else:
        values = profile.representative
    if strategy in ("cv1", "cv3"):
        center = float(np.median(values))
        spread = mad_scale * float(median_abs_deviation(values, scale=1.0))
    else:
        center = float(values.mean())
        spread = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return center + multiplier * spread


def merge_test(dm: DistanceMatrix, host_members: Sequence[int], candidate: int,
               config: MergeConfig, host_cluster: int = -1) -> MergeTest:
    """Can `candidate` be considered part of the host cluster?"""
    host = np.asarray(host_members, dtype=int)
    if host.size == 0:
        raise PartitionError("host cluster is empty")
    if candidate in host:
        raise PartitionError(f"candidate {candidate} already belongs to the host cluster")
    scope = np.union1d(host, [candidate])
    q_max = min(scope.size - 1, config.q_max_cap)
    profile = lof_profile(dm, scope, q_max)
    lof_value = profile.score_of(int(candidate))
    cv = critical_value(profile, config.cv_strategy, config.mad_scale, config.multiplier)
    return MergeTest(candidate_point=int(candidate), host_cluster=int(host_cluster), q_max=q_max,
                     lof_value=lof_value, cv=cv, passed=bool(lof_value < cv))


@dataclass
class MergeTrace:
    initial: Partition
    final: Partition
    events: List[MergeEvent] = field(default_factory=list)

    @property
    def merges(self) -> int:
        return sum(e.merged for e in self.events)

    @property
    def rejections(self) -> int:
        return sum(not e.merged for e in self.events)


def work_bound(k: int) -> int:
    """Merges plus rejections the loop may perform starting from k clusters."""
    return max(k - 1, 0) + k * (k * (k - 1) // 2)


def run(dm: DistanceMatrix, initial: Partition, config: MergeConfig) -> MergeTrace:
    state = _ClusterLinkage(initial, dm)
    bound = work_bound(initial.k)
    events: List[MergeEvent] = []
    while state.k >= 2:
        pair = state.closest()
        if pair is None:
            break
        l, m, o, p, distance = pair
        test_p = merge_test(dm, state.members[l], p, config, host_cluster=l)
        test_o = merge_test(dm, state.members[m], o, config, host_cluster=m) if test_p.passed else None
        merged = test_p.passed and test_o is not None and test_o.passed
        events.append(MergeEvent(step=len(events), l=l, m=m, o=o, p=p, distance=distance,
                                  test_p=test_p, test_o=test_o, merged=merged))
        if merged:
            state.merge(l, m)
        else:
            state.exclude(l, m)
        log_event(logger, logging.DEBUG, "merge_step", step=len(events) - 1, l=l, m=m,
                  merged=merged, k=state.k)
        if len(events) > bound:
            raise PartitionError(f"merge loop exceeded its work bound of {bound} steps")
    final = Partition(state.assignment)
    trace = MergeTrace(initial, final, events)
    log_event(logger, logging.INFO, "merge_done", k_initial=initial.k, k_final=final.k,
              merges=trace.merges, rejections=trace.rejections)
    return trace


def replay(initial: Partition, events: Sequence[MergeEvent]) -> Partition:
    part = initial
    for e in events:
        if e.merged:
            part = part.merged(e.l, e.m)
    return part


def trace_to_jsonl(trace: MergeTrace) -> bytes:
    lines = [orjson.dumps(orjson.loads(e.model_dump_json()), option=orjson.OPT_SORT_KEYS)
             for e in trace.events]
    return b"".join(line + b"\n" for line in lines)


def trace_from_jsonl(blob: bytes) -> List[MergeEvent]:
    return [MergeEvent.model_validate(orjson.loads(line)) for line in blob.splitlines() if line.strip()]
