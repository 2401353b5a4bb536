#!/usr/bin/env python3
"""
Tests for pairwise distances and tie-inclusive neighborhoods.
"""
import sys
sys.path.insert(0, '.')

import numpy as np

from iclust.data import DataMatrix
from iclust.errors import NeighborhoodError
from iclust.neighbors import DistanceMatrix, neighborhood, pairwise_distances


def _line(*xs) -> DistanceMatrix:
    return pairwise_distances(DataMatrix(np.array(xs, dtype=float).reshape(-1, 1)))


def test_pairwise_matches_brute_force():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(15, 3))
    dm = pairwise_distances(DataMatrix(x))
    for i in range(15):
        for j in range(15):
            assert abs(dm.d[i, j] - np.sqrt(((x[i] - x[j]) ** 2).sum())) < 1e-12
    assert not dm.d.flags.writeable


def test_single_point():
    dm = pairwise_distances(DataMatrix(np.array([[1.0, 2.0]])))
    assert dm.n == 1 and dm.d[0, 0] == 0


def test_ties_enlarge_neighborhood():
    dm = _line(0, 1, -1, 5)
    nb = neighborhood(dm, 0, 1)
    assert nb.q_distance == 1.0
    assert nb.members == (1, 2)


def test_scope_restricts_candidates():
    dm = _line(0, 1, -1, 5)
    nb = neighborhood(dm, 0, 1, scope=[0, 3])
    assert nb.members == (3,) and nb.q_distance == 5.0


def test_duplicates_give_zero_q_distance():
    dm = _line(2, 2, 2, 9)
    nb = neighborhood(dm, 0, 2)
    assert nb.q_distance == 0.0 and nb.members == (1, 2)


def test_invalid_requests():
    dm = _line(0, 1, 2)
    for args in [(0, 0), (0, 3), (5, 1)]:
        try:
            neighborhood(dm, *args)
        except NeighborhoodError:
            continue
        raise AssertionError(f"neighborhood{args} should fail")


def test_distance_matrix_validation():
    for bad in (np.array([[0.0, 1.0], [2.0, 0.0]]), np.array([[1.0, 0.0], [0.0, 0.0]]),
                np.zeros((2, 3)), np.array([[0.0, -1.0], [-1.0, 0.0]])):
        try:
            DistanceMatrix(bad)
        except NeighborhoodError:
            continue
        raise AssertionError("invalid distance matrix accepted")


def test_neighborhood_matches_sort_and_scan():
    rng = np.random.default_rng(30)
    x = np.round(rng.normal(size=(30, 2)), 1)
    dm = pairwise_distances(DataMatrix(x))
    for i in range(30):
        others = sorted((dm.d[i, j], j) for j in range(30) if j != i)
        for q in (1, 2, 5, 12, 29):
            kd = others[q - 1][0]
            nb = neighborhood(dm, i, q)
            assert nb.q_distance == kd
            assert set(nb.members) == {j for d, j in others if d <= kd}
            assert len(nb.members) >= q


def test_triangle_inequality():
    rng = np.random.default_rng(31)
    d = pairwise_distances(DataMatrix(rng.normal(size=(20, 4)))).d
    assert (d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-12).all()


def test_neighborhoods_grow_with_q():
    rng = np.random.default_rng(32)
    dm = pairwise_distances(DataMatrix(np.round(rng.normal(size=(25, 3)), 1)))
    for i in range(25):
        prev = neighborhood(dm, i, 1)
        for q in range(2, 25):
            nb = neighborhood(dm, i, q)
            assert nb.q_distance >= prev.q_distance
            assert set(prev.members) <= set(nb.members)
            prev = nb


if __name__ == "__main__":
    from testkit import run_tests
    run_tests(globals())
