"""
Local Outlier Factor on a scoped point set, over a range of neighborhood sizes.

Conventions for degenerate densities:
  - lrd is +inf when every reachability distance in the neighborhood is 0
    (the point sits in a clump of at least q duplicates);
  - ratio lrd(b)/lrd(i) is 1 when both are infinite and 0 when only lrd(i) is;
  - a finite-density point whose neighbor has infinite density gets LOF = +inf.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import NeighborhoodError
from .neighbors import DistanceMatrix, neighborhood, resolve_scope


@dataclass(frozen=True)
class LofProfile:
    point_ids: Tuple[int, ...]
    q_max: int
    # scores[i, q-1] = LOF_q of point_ids[i]
    scores: np.ndarray

    @property
    def representative(self) -> np.ndarray:
        return self.scores.mean(axis=1)

    def score_of(self, point: int) -> float:
        return float(self.representative[self.point_ids.index(point)])


def lrd(dm: DistanceMatrix, i: int, q: int, scope: Optional[Sequence[int]] = None) -> float:
    nb = neighborhood(dm, i, q, scope)
    total = 0.0
    for b in nb.members:
        total += max(neighborhood(dm, b, q, scope).q_distance, dm.d[i, b])
    if total == 0.0:
        return float("inf")
    return len(nb.members) / total


class _ScopedKernel:
    """Distances of one scope with self-distances masked and rows pre-sorted."""

    def __init__(self, dm: DistanceMatrix, scope: Optional[Sequence[int]]):
        self.ids = resolve_scope(dm.n, scope)
        self.d = dm.d[np.ix_(self.ids, self.ids)]
        masked = self.d.copy()
        np.fill_diagonal(masked, np.inf)
        self.masked = masked
        self.sorted = np.sort(masked, axis=1)

    @property
    def size(self) -> int:
        return self.ids.size

    def lof(self, q: int) -> np.ndarray:
        if q < 1 or q > self.size - 1:
            raise NeighborhoodError(f"scope of {self.size} points is too small for q={q}", q=q)
        kdist = self.sorted[:, q - 1]
        member = self.masked <= kdist[:, None]
        reach = np.maximum(self.d, kdist[None, :])
        # sorted rows sum identically whatever the position of the diagonal
        sums = np.sort(np.where(member, reach, 0.0), axis=1).sum(axis=1)
        counts = member.sum(axis=1)
        with np.errstate(divide="ignore"):
            dens = np.where(sums > 0, counts / np.where(sums > 0, sums, 1.0), np.inf)

        num = np.broadcast_to(dens[None, :], member.shape)
        den = np.broadcast_to(dens[:, None], member.shape)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = num / den
        ratio = np.where(np.isinf(num) & np.isinf(den), 1.0, ratio)
        ratio = np.where(np.isfinite(num) & np.isinf(den), 0.0, ratio)
        return np.where(member, ratio, 0.0).sum(axis=1) / counts


def lof_scores(dm: DistanceMatrix, scope: Optional[Sequence[int]], q: int) -> np.ndarray:
    """LOF_q for every point of `scope` (sorted index order), neighborhoods taken within scope."""
    return _ScopedKernel(dm, scope).lof(q)


def lof_profile(dm: DistanceMatrix, scope: Optional[Sequence[int]], q_max: int) -> LofProfile:
    kernel = _ScopedKernel(dm, scope)
    if q_max < 1 or kernel.size < q_max + 1:
        raise NeighborhoodError(f"scope of {kernel.size} points is too small for q_max={q_max}",
                                q_max=q_max)
    scores = np.column_stack([kernel.lof(q) for q in range(1, q_max + 1)])
    scores.setflags(write=False)
    return LofProfile(tuple(int(i) for i in kernel.ids), q_max, scores)
