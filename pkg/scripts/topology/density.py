# scripts/topology/density.py
"""
k-NN-täthet och densitetsfiltreringen ρ(k, p, X).

Avståndet till k:e närmaste granne (punkten själv exkluderad) är omvänt
korrelerat med tätheten. Filtreringen behåller de m = max(1, floor(p·n))
punkter som har minst k-NN-avstånd; lika avstånd avgörs av index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scripts.topology.errors import KTooLarge
from scripts.topology.pointcloud import DEFAULT_METRIC, MetricMode, PointCloud, distance_blocks

# skydd mot binär avrundning, t.ex. 0.29 * 100 = 28.999999999999996
COUNT_EPS = 1e-9


@dataclass(frozen=True)
class FiltrationParams:
    k: int
    p: float

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k måste vara ett positivt heltal, fick {self.k}")
        if not (0.0 < float(self.p) <= 1.0):
            raise ValueError(f"p måste ligga i (0, 1], fick {self.p}")

    def check(self, n: int) -> None:
        if self.k >= n:
            raise KTooLarge(self.k, n)

    def retained_count(self, n: int) -> int:
        return retained_count(self.p, n)

    def notation(self) -> str:
        return f"ρ({self.k},{self.p:g})"


def retained_count(p: float, n: int) -> int:
    return max(1, math.floor(p * n + COUNT_EPS))


def knn_distance(cloud: PointCloud, k: int, mode: MetricMode | str = DEFAULT_METRIC) -> np.ndarray:
    n = cloud.n
    if k < 1:
        raise ValueError(f"k måste vara ≥ 1, fick {k}")
    if k >= n:
        raise KTooLarge(k, n)
    out = np.empty(n, dtype=np.float64)
    for start, block in distance_blocks(cloud, mode):
        rows = np.arange(block.shape[0])
        # exkludera punkten själv via index, inte via värdet 0 (dubbletter)
        block[rows, start + rows] = np.inf
        out[start:start + block.shape[0]] = np.partition(block, k - 1, axis=1)[:, k - 1]
    return out


def filtration_indices(
    cloud: PointCloud,
    params: FiltrationParams,
    mode: MetricMode | str = DEFAULT_METRIC,
) -> np.ndarray:
    """Index (stigande) för punkterna som överlever ρ(k, p, X)."""
    params.check(cloud.n)
    dist = knn_distance(cloud, params.k, mode)
    m = params.retained_count(cloud.n)
    order = np.lexsort((np.arange(cloud.n), dist))
    return np.sort(order[:m])


def density_filtration(
    cloud: PointCloud,
    params: FiltrationParams,
    mode: MetricMode | str = DEFAULT_METRIC,
) -> PointCloud:
    return cloud.subset(filtration_indices(cloud, params, mode))
