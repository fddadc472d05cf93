from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scripts.topology.synth import SHAPES, ShapeSpec, sample


def test_circle_grid():
    cloud = sample(ShapeSpec("circle2d", 4))
    np.testing.assert_allclose(cloud.points, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    assert cloud.labels[0] == "circle2d/0"


def test_two_circles_on_shape():
    pts = sample(ShapeSpec("two_circles2d", 101)).points
    left, right = pts[:51], pts[51:]
    np.testing.assert_allclose(np.hypot(left[:, 0] + 0.5, left[:, 1]), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.hypot(right[:, 0] - 0.5, right[:, 1]), 1.0, atol=1e-12)


@pytest.mark.parametrize("shape", ["primary_circle9d", "klein9d"])
def test_nine_dim_shapes_are_normalized_filters(shape):
    pts = sample(ShapeSpec(shape, 50)).points
    assert pts.shape == (50, 9)
    np.testing.assert_allclose(pts.mean(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)


def test_primary_circle9d_lies_in_a_plane():
    pts = sample(ShapeSpec("primary_circle9d", 40)).points
    assert np.linalg.matrix_rank(pts, tol=1e-9) == 2


def test_gaussian_blob_shape_and_scale():
    pts = sample(ShapeSpec("gaussian_blob", 4000, dim=3, sigma=2.0, seed=1)).points
    assert pts.shape == (4000, 3)
    assert pts.std(axis=0) == pytest.approx([2.0, 2.0, 2.0], rel=0.1)


@settings(max_examples=30, deadline=None)
@given(shape=st.sampled_from(SHAPES), n=st.integers(1, 60),
       noise=st.floats(0.0, 0.5), seed=st.integers(0, 2**31 - 1))
def test_same_seed_same_cloud(shape, n, noise, seed):
    spec = ShapeSpec(shape, n, noise, seed)
    np.testing.assert_array_equal(sample(spec).points, sample(spec).points)


def test_noise_zero_is_seed_independent():
    a = sample(ShapeSpec("klein9d", 30, 0.0, 1)).points
    b = sample(ShapeSpec("klein9d", 30, 0.0, 2)).points
    np.testing.assert_array_equal(a, b)


def test_noise_perturbs():
    a = sample(ShapeSpec("circle2d", 30, 0.1, 1)).points
    b = sample(ShapeSpec("circle2d", 30, 0.1, 2)).points
    assert not np.array_equal(a, b)


@pytest.mark.parametrize("kwargs", [{"shape": "torus"}, {"n": 0}, {"noise": -1.0}, {"sigma": 0.0}])
def test_invalid_shape_parameters(kwargs):
    with pytest.raises(ValueError):
        ShapeSpec(**kwargs)
