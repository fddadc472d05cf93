# scripts/topology/synth.py
"""
Syntetiska punktmoln med känd topologi – orakel för testerna och CLI:t.

noise = 0 ger deterministiska, jämnt fördelade parametrar. noise > 0 lägger
till isotropt brus N(0, noise²) från numpy default_rng(seed).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scripts.topology.filterbank import klein_patches, primary_circle_bank
from scripts.topology.pointcloud import PointCloud

SHAPES = ("circle2d", "two_circles2d", "primary_circle9d", "klein9d", "gaussian_blob")

TWO_CIRCLE_CENTERS = (-0.5, 0.5)
GOLDEN_FRACTION = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ShapeSpec:
    shape: str = "circle2d"
    n: int = 200
    noise: float = 0.0
    seed: int = 0
    dim: int = 2          # bara gaussian_blob
    sigma: float = 1.0    # bara gaussian_blob

    def __post_init__(self) -> None:
        if self.shape not in SHAPES:
            raise ValueError(f"okänd form '{self.shape}' (välj bland: {', '.join(SHAPES)})")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n måste vara ≥ 1, fick {self.n}")
        if not float(self.noise) >= 0.0:
            raise ValueError(f"noise måste vara ≥ 0, fick {self.noise}")
        if self.dim < 1:
            raise ValueError(f"dim måste vara ≥ 1, fick {self.dim}")
        if not float(self.sigma) > 0.0:
            raise ValueError(f"sigma måste vara > 0, fick {self.sigma}")


def _circle(n: int, cx: float = 0.0) -> np.ndarray:
    t = 2.0 * math.pi * np.arange(n) / n
    return np.stack([cx + np.cos(t), np.sin(t)], axis=1)


def _klein(n: int) -> np.ndarray:
    k = np.arange(n)
    thetas = math.pi * k / n
    phis = 2.0 * math.pi * np.mod(k * GOLDEN_FRACTION, 1.0)
    return klein_patches(thetas, phis).reshape(n, 9)


def _ideal(spec: ShapeSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.shape == "circle2d":
        return _circle(spec.n)
    if spec.shape == "two_circles2d":
        first = (spec.n + 1) // 2
        left, right = TWO_CIRCLE_CENTERS
        return np.vstack([_circle(first, left), _circle(spec.n - first, right)])
    if spec.shape == "primary_circle9d":
        return primary_circle_bank(spec.n).filters.reshape(spec.n, 9)
    if spec.shape == "klein9d":
        return _klein(spec.n)
    return spec.sigma * rng.standard_normal((spec.n, spec.dim))


def sample(spec: ShapeSpec) -> PointCloud:
    rng = np.random.default_rng(spec.seed)
    pts = _ideal(spec, rng)
    if spec.noise > 0.0:
        pts = pts + spec.noise * rng.standard_normal(pts.shape)
    labels = tuple(f"{spec.shape}/{i}" for i in range(spec.n))
    return PointCloud(pts, labels)
