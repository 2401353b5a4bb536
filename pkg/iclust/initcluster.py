"""
Initial over-clustering: agglomerative hierarchical clustering (Ward, complete,
single linkage) cut to k clusters, and k-means with k-means++ seeding.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from .data import DataMatrix, make_rng
from .errors import DataError, PartitionError
from .log import log_event
from .neighbors import DistanceMatrix
from .schemas import Linkage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Partition:
    """Disjoint cover of observations 0..n-1; ids are arbitrary nonnegative ints."""
    assignment: np.ndarray

    def __post_init__(self):
        a = np.array(self.assignment, dtype=np.int64, copy=True)
        if a.ndim != 1 or a.size < 1:
            raise PartitionError("assignment must be a nonempty 1-D sequence")
        if (a < 0).any():
            raise PartitionError("cluster ids must be nonnegative")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @classmethod
    def from_labels(cls, labels: Sequence) -> "Partition":
        """Relabel arbitrary labels to 0..k-1 in order of first appearance."""
        _, first, inverse = np.unique(np.asarray(labels), return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        return cls(rank[inverse.ravel()])

    @property
    def n(self) -> int:
        return self.assignment.size

    @property
    def ids(self) -> List[int]:
        return [int(c) for c in np.unique(self.assignment)]

    @property
    def k(self) -> int:
        return len(self.ids)

    @property
    def clusters(self) -> Dict[int, np.ndarray]:
        return {c: np.flatnonzero(self.assignment == c) for c in self.ids}

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cluster_id)

    def normalized(self) -> "Partition":
        return Partition.from_labels(self.assignment)

    def merged(self, keep: int, absorb: int) -> "Partition":
        a = self.assignment.copy()
        a[a == absorb] = keep
        return Partition(a)


@dataclass(frozen=True)
class Dendrogram:
    """
    Merge sequence in the usual linkage-matrix layout: row t is
    (left node, right node, height, size); leaves are 0..n-1 and the node
    created at step t is n+t.
    """
    merges: np.ndarray
    n: int
    linkage: str = "ward"


def hierarchical(dm: DistanceMatrix, linkage: Linkage = "ward") -> Dendrogram:
    """
    Agglomerative clustering with Lance-Williams updates.

    Each cluster lives in the slot of its smallest observation index, and that
    index is the cluster's id for tie-breaking: among equally close pairs the
    one with the lexicographically smallest (min id, max id) merges first.
    Ward works on squared distances and reports sqrt of the merge cost, the
    scale of the common "ward.D2" implementation.
    """
    n = dm.n
    if n < 2:
        raise PartitionError("hierarchical clustering needs at least 2 observations")
    ward = linkage == "ward"
    D = dm.d ** 2 if ward else dm.d.copy()
    np.fill_diagonal(D, np.inf)
    active = np.ones(n, dtype=bool)
    size = np.ones(n, dtype=np.int64)
    node = np.arange(n, dtype=np.int64)

    # nearest neighbour of each slot among the slots above it
    nn_dist = np.full(n, np.inf)
    nn_idx = np.full(n, -1, dtype=np.int64)

    def refresh(i: int) -> None:
        if i >= n - 1 or not active[i]:
            nn_dist[i], nn_idx[i] = np.inf, -1
            return
        row = D[i, i + 1:]
        j = int(np.argmin(row))
        nn_dist[i], nn_idx[i] = row[j], i + 1 + j

    for i in range(n):
        refresh(i)

    merges = np.empty((n - 1, 4), dtype=np.float64)
    for t in range(n - 1):
        a = int(np.argmin(nn_dist))
        b = int(nn_idx[a])
        dab = D[a, b]
        others = active.copy()
        others[[a, b]] = False
        ks = np.flatnonzero(others)
        if linkage == "single":
            new = np.minimum(D[a, ks], D[b, ks])
        elif linkage == "complete":
            new = np.maximum(D[a, ks], D[b, ks])
        else:
            na, nb, nk = size[a], size[b], size[ks]
            new = np.maximum(
                ((na + nk) * D[a, ks] + (nb + nk) * D[b, ks] - nk * dab) / (na + nb + nk), 0.0)
        merges[t] = (min(node[a], node[b]), max(node[a], node[b]),
                     math.sqrt(max(dab, 0.0)) if ward else dab, size[a] + size[b])

        D[a, ks] = new
        D[ks, a] = new
        D[b, :] = np.inf
        D[:, b] = np.inf
        active[b] = False
        size[a] += size[b]
        node[a] = n + t

        refresh(a)
        refresh(b)
        below = ks[ks < a]
        stale = below[(nn_idx[below] == a) | (nn_idx[below] == b)]
        for i in stale:
            refresh(int(i))
        fresh = below[(nn_idx[below] != a) & (nn_idx[below] != b)]
        better = fresh[(D[fresh, a] < nn_dist[fresh]) |
                       ((D[fresh, a] == nn_dist[fresh]) & (a < nn_idx[fresh]))]
        nn_dist[better] = D[better, a]
        nn_idx[better] = a
        between = ks[(ks > a) & (ks < b)]
        for i in between[nn_idx[between] == b]:
            refresh(int(i))

    log_event(logger, logging.DEBUG, "dendrogram_built", n=n, linkage=linkage,
              top_height=float(merges[-1, 2]))
    return Dendrogram(merges, n, linkage)


def cut(d: Dendrogram, k: int) -> Partition:
    """Undo the last k-1 merges."""
    if k < 1 or k > d.n:
        raise PartitionError(f"k={k} out of range [1, {d.n}]")
    parent = list(range(2 * d.n - 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t in range(d.n - k):
        left, right = int(d.merges[t, 0]), int(d.merges[t, 1])
        parent[find(left)] = d.n + t
        parent[find(right)] = d.n + t
    return Partition.from_labels([find(i) for i in range(d.n)])


@dataclass
class KMeansFit:
    partition: Partition
    centers: np.ndarray
    n_iter: int
    # within-cluster SSE after every assignment step
    sse_history: List[float] = field(default_factory=list)


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=closest / total))
        else:
            # only duplicates of chosen centers remain
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        closest = np.minimum(closest, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[chosen].copy()


def kmeans_fit(m: DataMatrix, k: int, seed, max_iter: int = 100) -> KMeansFit:
    x = m.values
    n = x.shape[0]
    if k < 1 or k > n:
        raise PartitionError(f"k={k} out of range [1, {n}]")
    if max_iter < 1:
        raise PartitionError("max_iter must be >= 1")
    centers = _kmeans_pp(x, k, make_rng(seed))
    labels = None
    history: List[float] = []
    it = 0
    for it in range(1, max_iter + 1):
        dist2 = cdist(x, centers, metric="sqeuclidean")
        new = np.argmin(dist2, axis=1)
        # empty-cluster repair: hand the worst-fitted point to the empty cluster
        for c in range(k):
            if not (new == c).any():
                own = dist2[np.arange(n), new]
                counts = np.bincount(new, minlength=k)
                own = np.where(counts[new] > 1, own, -1.0)
                far = int(np.argmax(own))
                new[far] = c
                centers[c] = x[far]
                dist2[:, c] = ((x - centers[c]) ** 2).sum(axis=1)
        history.append(float(dist2[np.arange(n), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            centers[c] = x[labels == c].mean(axis=0)
    log_event(logger, logging.DEBUG, "kmeans_done", k=k, iterations=it, sse=history[-1])
    return KMeansFit(Partition.from_labels(labels), centers, it, history)


def kmeans(m: DataMatrix, k: int, seed, max_iter: int = 100) -> Partition:
    return kmeans_fit(m, k, seed, max_iter).partition


def default_k_init(n: int) -> int:
    return k_init_for("log10", n)


_LOG_FACTORS = {"log5": 5.0, "log10": 10.0, "log15": 15.0}


def k_init_for(strategy: str, n: int) -> int:
    """`log5`/`log10`/`log15` give ceil(c*ln n), `quarter` gives ceil(n/4), digits are taken literally."""
    if n < 1:
        raise PartitionError("n must be >= 1")
    if strategy in _LOG_FACTORS:
        raw = math.ceil(_LOG_FACTORS[strategy] * math.log(n))
    elif strategy == "quarter":
        raw = math.ceil(n / 4)
    elif strategy == "auto":
        raw = math.ceil(10.0 * math.log(n))
    elif strategy.isdigit():
        raw = int(strategy)
    else:
        raise PartitionError(f"unknown k_init strategy '{strategy}'")
    k = min(max(raw, 1), n)
    if k != raw:
        log_event(logger, logging.WARNING, "k_init_clamped", requested=raw, used=k, n=n)
    return k


def write_partition(part: Partition, path) -> None:
    pd.DataFrame({"row_index": np.arange(part.n), "cluster_id": part.assignment}) \
        .to_csv(path, index=False, lineterminator="\n")


def read_partition(path, n: Optional[int] = None) -> Partition:
    """Two-column CSV (row_index, cluster_id); rows must cover 0..n-1 exactly once."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"partition file not found: {path}", path=str(path))
    try:
        df = pd.read_csv(path, dtype={"cluster_id": str})
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise DataError(f"cannot parse partition {path}: {e}", path=str(path))
    if list(df.columns[:2]) != ["row_index", "cluster_id"]:
        raise DataError("partition CSV needs columns row_index, cluster_id", path=str(path))
    rows = pd.to_numeric(df["row_index"], errors="coerce")
    expected = n if n is not None else len(df)
    if rows.isna().any() or sorted(rows.astype(int)) != list(range(expected)):
        raise PartitionError(f"partition rows in {path} do not cover 0..{expected - 1} exactly once")
    order = np.argsort(rows.to_numpy(dtype=np.int64))
    return Partition.from_labels(df["cluster_id"].to_numpy()[order])
