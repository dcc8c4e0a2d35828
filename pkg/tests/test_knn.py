"""Neighbor-distance queries: tree vs brute force, edge semantics, volumes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divknn import knn
from divknn.errors import DegenerateDistanceError, InsufficientSampleError


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


# ---------------------------------------------------------------------------
# Hand cases.

def test_within_two_points_on_a_line():
    idx = knn.build_index([[0.0], [2.0]])
    assert knn.kth_nn_within(idx, 1).tolist() == [2.0, 2.0]


def test_cross_hand_case():
    # queries {0, 2} against the single reference point {1}
    idx = knn.build_index([[1.0]])
    got = knn.kth_nn_cross([[0.0], [2.0]], idx, 1)
    assert got.tolist() == [1.0, 1.0]


def test_within_unequal_gaps():
    # gaps 1 and 3: nearest-other distances are 1, 1, 3
    idx = knn.build_index([[0.0], [1.0], [4.0]])
    assert knn.kth_nn_within(idx, 1).tolist() == [1.0, 1.0, 3.0]
    assert knn.kth_nn_within(idx, 2).tolist() == [4.0, 3.0, 4.0]


def test_cross_excludes_single_coincidence():
    # the query at 1.0 sits exactly on an indexed point, which must not
    # count as its own neighbor
    idx = knn.build_index([[0.0], [1.0], [3.0]])
    got = knn.kth_nn_cross([[1.0]], idx, 1)
    assert got.tolist() == [1.0]
    got = knn.kth_nn_cross([[1.0]], idx, 2)
    assert got.tolist() == [2.0]


def test_cross_duplicate_reference_raises():
    idx = knn.build_index([[1.0], [1.0], [3.0]])
    with pytest.raises(DegenerateDistanceError):
        knn.kth_nn_cross([[1.0]], idx, 1)


def test_cross_coincidence_needs_one_extra_point():
    idx = knn.build_index([[1.0], [2.0]])
    with pytest.raises(InsufficientSampleError):
        knn.kth_nn_cross([[1.0]], idx, 2)


def test_within_insufficient_sample():
    idx = knn.build_index([[0.0], [1.0]])
    with pytest.raises(InsufficientSampleError):
        knn.kth_nn_within(idx, 2)


def test_cross_k_larger_than_reference():
    idx = knn.build_index([[0.0], [1.0]])
    with pytest.raises(InsufficientSampleError):
        knn.kth_nn_cross([[5.0]], idx, 3)


def test_bad_inputs_rejected():
    with pytest.raises(ValueError):
        knn.build_index(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        knn.build_index([[np.nan]])
    with pytest.raises(ValueError):
        knn.build_index([1.0, 2.0])
    idx = knn.build_index([[0.0, 0.0]])
    with pytest.raises(ValueError):
        knn.kth_nn_cross([[1.0]], idx, 1)
    with pytest.raises(ValueError):
        knn.kth_nn_within(idx, 0)


# ---------------------------------------------------------------------------
# Tree answers must equal the brute-force route bit for bit.

@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(5, 60),
    d=st.integers(1, 4),
    k=st.integers(1, 4),
)
def test_tree_matches_brute_within(seed, n, d, k):
    pts = _rng(seed).normal(size=(n, d))
    idx = knn.build_index(pts)
    tree = knn.kth_nn_within(idx, k)
    brute = knn.brute_kth_nn_within(pts, k)
    assert np.array_equal(tree, brute)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(3, 40),
    m=st.integers(3, 40),
    d=st.integers(1, 4),
)
def test_tree_matches_brute_cross(seed, n, m, d):
    rng = _rng(seed)
    queries = rng.normal(size=(n, d))
    pts = rng.normal(size=(m, d))
    idx = knn.build_index(pts)
    k = min(3, m)
    tree = knn.kth_nn_cross(queries, idx, k)
    brute = knn.brute_kth_nn_cross(queries, pts, k)
    assert np.array_equal(tree, brute)


def test_high_dim_falls_back_to_brute():
    pts = _rng(3).normal(size=(30, knn.BRUTE_FORCE_DIM + 1))
    idx = knn.build_index(pts)
    assert idx.tree is None
    got = knn.kth_nn_within(idx, 2)
    assert np.array_equal(got, knn.brute_kth_nn_within(pts, 2))


def test_workers_do_not_change_results():
    pts = _rng(4).normal(size=(200, 2))
    idx = knn.build_index(pts)
    a = knn.kth_nn_within(idx, 5, workers=1)
    b = knn.kth_nn_within(idx, 5, workers=-1)
    assert np.array_equal(a, b)


def test_queries_are_deterministic():
    pts = _rng(5).normal(size=(100, 3))
    a = knn.kth_nn_within(knn.build_index(pts), 4)
    b = knn.kth_nn_within(knn.build_index(pts.copy()), 4)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# Unit-ball volumes.

def test_unit_ball_volume_known_dimensions():
    assert knn.unit_ball_volume(1) == 2.0
    assert math.isclose(knn.unit_ball_volume(2), math.pi, rel_tol=1e-15)
    assert math.isclose(knn.unit_ball_volume(3), 4.0 * math.pi / 3.0, rel_tol=1e-15)
    # even dimensions: pi^m / m!
    assert math.isclose(knn.unit_ball_volume(4), math.pi**2 / 2.0, rel_tol=1e-14)
    assert math.isclose(knn.unit_ball_volume(6), math.pi**3 / 6.0, rel_tol=1e-14)


def test_unit_ball_volume_recurrence():
    # c_d = c_{d-2} * 2*pi/d
    for d in range(3, 20):
        assert math.isclose(
            knn.unit_ball_volume(d),
            knn.unit_ball_volume(d - 2) * 2.0 * math.pi / d,
            rel_tol=1e-13,
        )


def test_unit_ball_volume_rejects_bad_dimension():
    with pytest.raises(ValueError):
        knn.unit_ball_volume(0)
    with pytest.raises(ValueError):
        knn.unit_ball_volume(2.5)
