"""
Pairwise Euclidean distances and tie-aware q-nearest-neighbor queries.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .data import DataMatrix
from .errors import NeighborhoodError


@dataclass(frozen=True)
class DistanceMatrix:
    # takes ownership of the array and freezes it
    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise NeighborhoodError(f"distance matrix must be square, got {d.shape}")
        if not np.isfinite(d).all() or (d < 0).any():
            raise NeighborhoodError("distances must be finite and nonnegative")
        if not np.array_equal(d, d.T) or np.diagonal(d).any():
            raise NeighborhoodError("distance matrix must be symmetric with a zero diagonal")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def submatrix(self, scope: Sequence[int]) -> np.ndarray:
        idx = np.asarray(scope, dtype=int)
        return self.d[np.ix_(idx, idx)]


@dataclass(frozen=True)
class Neighborhood:
    center: int
    q: int
    q_distance: float
    members: Tuple[int, ...]


def pairwise_distances(m: DataMatrix) -> DistanceMatrix:
    """Exact O(n^2) Euclidean distances; each entry is computed independently of the rest."""
    if m.n == 1:
        return DistanceMatrix(np.zeros((1, 1)))
    return DistanceMatrix(squareform(pdist(m.values, metric="euclidean")))


def resolve_scope(n: int, scope: Optional[Sequence[int]]) -> np.ndarray:
    if scope is None:
        return np.arange(n)
    idx = np.unique(np.asarray(scope, dtype=int))
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise NeighborhoodError(f"scope indices must lie in [0, {n})")
    return idx


def neighborhood(dm: DistanceMatrix, i: int, q: int,
                 scope: Optional[Sequence[int]] = None) -> Neighborhood:
    """
    N_q(i) within `scope`: every other scoped point no farther than the q-th
    nearest one, so ties can make it larger than q.
    """
    idx = resolve_scope(dm.n, scope)
    if i not in idx:
        raise NeighborhoodError(f"center {i} is not in scope", center=i)
    others = idx[idx != i]
    if q < 1 or q > others.size:
        raise NeighborhoodError(f"q={q} out of range [1, {others.size}]", center=i, q=q)
    dists = dm.d[i, others]
    q_distance = float(np.partition(dists, q - 1)[q - 1])
    members = others[dists <= q_distance]
    return Neighborhood(int(i), int(q), q_distance, tuple(int(j) for j in members))
