from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scripts.topology.density import (
    FiltrationParams,
    density_filtration,
    filtration_indices,
    knn_distance,
    retained_count,
)
from scripts.topology.errors import KTooLarge
from scripts.topology.pointcloud import PointCloud
from tests.oracles import sort_and_select

LINE = PointCloud([[0.0], [1.0], [3.0]])


def test_knn_distance_examples():
    assert knn_distance(LINE, 1, "euclidean") == pytest.approx([1.0, 1.0, 2.0])
    assert knn_distance(LINE, 2, "euclidean") == pytest.approx([3.0, 2.0, 3.0])


def test_knn_excludes_self_not_duplicates():
    cloud = PointCloud([[0.0], [0.0], [5.0]])
    assert knn_distance(cloud, 1, "euclidean") == pytest.approx([0.0, 0.0, 5.0])


def test_k_too_large():
    with pytest.raises(KTooLarge) as err:
        knn_distance(LINE, 3, "euclidean")
    assert (err.value.k, err.value.n) == (3, 3)
    with pytest.raises(KTooLarge):
        density_filtration(LINE, FiltrationParams(3, 0.5), "euclidean")


@pytest.mark.parametrize("k, p", [(0, 0.5), (1, 0.0), (1, 1.5), (1.5, 0.5)])
def test_invalid_params(k, p):
    with pytest.raises(ValueError):
        FiltrationParams(k, p)


def test_density_filtration_example():
    out = density_filtration(LINE, FiltrationParams(1, 0.67), "euclidean")
    np.testing.assert_array_equal(out.points[:, 0], [0.0, 1.0])


def test_p_one_is_identity(rng):
    cloud = PointCloud(rng.normal(size=(40, 3)))
    out = density_filtration(cloud, FiltrationParams(5, 1.0))
    np.testing.assert_array_equal(out.points, cloud.points)


def test_ties_broken_by_index():
    # alla fyra har samma 1-NN-avstånd
    cloud = PointCloud([[0.0], [1.0], [10.0], [11.0]])
    idx = filtration_indices(cloud, FiltrationParams(1, 0.5), "euclidean")
    np.testing.assert_array_equal(idx, [0, 1])


def test_first_layer_stage_count():
    assert retained_count(0.3, 6400) == 1920
    assert retained_count(0.29, 100) == 29
    assert retained_count(0.001, 10) == 1
    assert FiltrationParams(200, 0.3).notation() == "ρ(200,0.3)"


@settings(max_examples=100, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    k=st.integers(1, 30),
    p=st.floats(0.01, 1.0),
)
def test_matches_sort_and_select_oracle(seed, k, p):
    cloud = PointCloud(np.random.default_rng(seed).normal(size=(500, 9)))
    idx = filtration_indices(cloud, FiltrationParams(k, p), "vne_variance")
    assert idx.tolist() == sort_and_select(cloud, k, p, "vne_variance")
    assert len(idx) == max(1, math.floor(p * 500 + 1e-9))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 60), p=st.floats(0.001, 1.0), seed=st.integers(0, 1000))
def test_retained_size_formula(n, p, seed):
    cloud = PointCloud(np.random.default_rng(seed).normal(size=(n, 2)))
    out = density_filtration(cloud, FiltrationParams(1, p), "euclidean")
    assert out.n == retained_count(p, n)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 10),
       p1=st.floats(0.01, 1.0), p2=st.floats(0.01, 1.0))
def test_smaller_p_keeps_a_subset(seed, k, p1, p2):
    cloud = PointCloud(np.random.default_rng(seed).normal(size=(60, 4)))
    lo, hi = sorted((p1, p2))
    small = filtration_indices(cloud, FiltrationParams(k, lo), "euclidean")
    large = filtration_indices(cloud, FiltrationParams(k, hi), "euclidean")
    assert set(small.tolist()) <= set(large.tolist())


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 10), p=st.floats(0.01, 1.0))
def test_filtration_follows_point_order(seed, k, p):
    rng = np.random.default_rng(seed)
    cloud = PointCloud(rng.normal(size=(60, 4)))
    perm = rng.permutation(cloud.n)
    idx = filtration_indices(cloud, FiltrationParams(k, p), "euclidean")
    moved = filtration_indices(cloud.subset(perm), FiltrationParams(k, p), "euclidean")
    assert sorted(perm[moved].tolist()) == idx.tolist()
