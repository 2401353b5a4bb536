#!/usr/bin/env python3
"""
LOF against a straight transcription of the textbook definitions.
"""
import sys
sys.path.insert(0, '.')

import math

import numpy as np

from iclust.data import DataMatrix
from iclust.errors import NeighborhoodError
from iclust.lof import lof_profile, lof_scores, lrd
from iclust.merge import critical_value
from iclust.neighbors import pairwise_distances


def _dm(x):
    x = np.asarray(x, dtype=float)
    return pairwise_distances(DataMatrix(x.reshape(len(x), -1)))


def _reference_lof(d: np.ndarray, q: int) -> list:
    """Brute force: neighborhoods, reachability, lrd and LOF written out loop by loop."""
    n = d.shape[0]
    kdist = [sorted(d[i, j] for j in range(n) if j != i)[q - 1] for i in range(n)]
    hoods = [[j for j in range(n) if j != i and d[i, j] <= kdist[i]] for i in range(n)]

    def hood(i):
        return hoods[i]

    def density(i):
        total = sum(max(kdist[b], d[i, b]) for b in hood(i))
        return math.inf if total == 0 else len(hood(i)) / total

    out = []
    for i in range(n):
        li = density(i)
        ratios = []
        for b in hood(i):
            lb = density(b)
            if math.isinf(li) and math.isinf(lb):
                ratios.append(1.0)
            elif math.isinf(li):
                ratios.append(0.0)
            else:
                ratios.append(lb / li)
        out.append(sum(ratios) / len(ratios))
    return out


def test_line_example():
    scores = lof_scores(_dm([0, 1, 2, 10]), None, 2)
    assert abs(scores[0] - 0.875) < 1e-12
    assert abs(scores[1] - 4 / 3) < 1e-12
    assert abs(scores[2] - 0.875) < 1e-12
    assert abs(scores[3] - 119 / 24) < 1e-12


def test_lrd_center():
    assert abs(lrd(_dm([0, 1, 2]), 1, 2) - 0.5) < 1e-12


def test_matches_reference_on_random_instances():
    rng = np.random.default_rng(2017)
    for _ in range(200):
        n = int(rng.integers(3, 41))
        p = int(rng.integers(1, 6))
        x = rng.normal(size=(n, p))
        # planted duplicates
        for _ in range(int(rng.integers(0, 3))):
            x[rng.integers(n)] = x[rng.integers(n)]
        x = np.round(x, 1)
        dm = pairwise_distances(DataMatrix(x))
        q = int(rng.integers(1, min(10, n - 1) + 1))
        got = lof_scores(dm, None, q)
        want = _reference_lof(dm.d, q)
        for g, w in zip(got, want):
            if math.isinf(w):
                assert math.isinf(g)
            else:
                assert abs(g - w) < 1e-9, (g, w)


def test_scope_matches_subset():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(30, 2))
    scope = [0, 3, 4, 9, 12, 17, 21, 29]
    full = lof_scores(_dm(x), scope, 3)
    alone = lof_scores(_dm(x[scope]), None, 3)
    assert np.allclose(full, alone)


def test_simplex_is_uniform():
    for n in range(3, 13):
        dm = _dm(np.eye(n))
        profile = lof_profile(dm, None, n - 1)
        assert (profile.scores == 1.0).all()
        assert critical_value(profile, "cv1") == 1.0


def test_duplicate_clump_has_unit_lof():
    scores = lof_scores(_dm([0, 0, 0, 0]), None, 2)
    assert (scores == 1.0).all()


def test_point_next_to_clump_is_infinite():
    # lrd of the clump members is infinite, the outsider's is finite
    scores = lof_scores(_dm([0, 0, 0, 1]), None, 2)
    assert math.isinf(scores[3])


def test_profile_shape_and_representative():
    profile = lof_profile(_dm([0, 1, 2, 10, 11]), [0, 1, 2, 3], 3)
    assert profile.point_ids == (0, 1, 2, 3)
    assert profile.scores.shape == (4, 3)
    assert np.allclose(profile.representative, profile.scores.mean(axis=1))
    assert profile.score_of(3) == float(profile.representative[3])


def test_scope_too_small():
    for scope, q_max in (([0, 1], 2), ([0], 1)):
        try:
            lof_profile(_dm([0, 1, 2]), scope, q_max)
        except NeighborhoodError:
            continue
        raise AssertionError("undersized scope accepted")


def test_scores_ignore_scale_shift_and_rotation():
    rng = np.random.default_rng(40)
    x = rng.normal(size=(25, 3))
    rotation, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    base = lof_profile(_dm(x), None, 5).scores
    for moved in (3.7 * x, x + np.array([5.0, -2.0, 11.0]), x @ rotation):
        assert np.allclose(lof_profile(_dm(moved), None, 5).scores, base, rtol=0, atol=1e-9)


def test_scores_follow_point_permutation():
    rng = np.random.default_rng(41)
    x = rng.normal(size=(25, 2))
    perm = rng.permutation(25)
    for q in (1, 3, 7):
        base = lof_scores(_dm(x), None, q)
        assert np.allclose(lof_scores(_dm(x[perm]), None, q), base[perm], rtol=0, atol=1e-12)


if __name__ == "__main__":
    from testkit import run_tests
    run_tests(globals())
