# scripts/topology/pointcloud.py
"""
Punktmoln, normalisering, metriker och extraktion av spatiala filter.

- PointCloud: n punkter i d dimensioner + ev. etiketter (proveniens)
- WeightTensor: w×h×c×dnum vikter, layout map -> kanal -> rad -> kolumn
- MetricMode: euclidean | vne_variance | vne_stddev
- VNE använder populationsvarians (dela med n)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from scripts.topology.errors import ConstantPoint, ShapeError, ZeroVarianceColumn

# radblock för k-NN-avstånd (minne: block × n flyttal)
DISTANCE_BLOCK_ROWS = 1024


class MetricMode(str, Enum):
    EUCLIDEAN = "euclidean"
    VNE_VARIANCE = "vne_variance"
    VNE_STDDEV = "vne_stddev"

    @classmethod
    def parse(cls, value: "MetricMode | str") -> "MetricMode":
        if isinstance(value, MetricMode):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"Okänd metrik '{value}' (välj bland: {names}).") from None


DEFAULT_METRIC = MetricMode.VNE_VARIANCE


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ShapeError(f"punkterna måste vara en n×d-matris, fick form {pts.shape}")
        if pts.shape[1] < 1:
            raise ShapeError("punktdimensionen måste vara minst 1")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != pts.shape[0]:
                raise ShapeError(f"{len(labels)} etiketter för {pts.shape[0]} punkter")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def d(self) -> int:
        return int(self.points.shape[1])

    def __len__(self) -> int:
        return self.n

    def subset(self, indices: Sequence[int]) -> "PointCloud":
        idx = np.asarray(indices, dtype=np.int64)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return PointCloud(self.points[idx], labels)

    @classmethod
    def concat(cls, clouds: Iterable["PointCloud"]) -> "PointCloud":
        clouds = list(clouds)
        if not clouds:
            raise ShapeError("inga punktmoln att slå ihop")
        dims = {c.d for c in clouds}
        if len(dims) != 1:
            raise ShapeError(f"olika punktdimensioner: {sorted(dims)}")
        pts = np.vstack([c.points for c in clouds])
        if all(c.labels is not None for c in clouds):
            labels: Optional[Tuple[str, ...]] = tuple(l for c in clouds for l in c.labels)  # type: ignore[union-attr]
        else:
            labels = None
        return cls(pts, labels)


@dataclass(frozen=True)
class WeightTensor:
    w: int
    h: int
    c: int
    dnum: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for name in ("w", "h", "c", "dnum"):
            if int(getattr(self, name)) < 1:
                raise ShapeError(f"{name} måste vara ≥ 1")
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        expected = self.w * self.h * self.c * self.dnum
        if vals.size != expected:
            raise ShapeError(f"{vals.size} värden, förväntade w·h·c·dnum = {expected}")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


# ---------- Normalisering ----------
def constant_mask(cloud: PointCloud) -> np.ndarray:
    """True för punkter där alla koordinater är lika (noll efter centrering)."""
    if cloud.n == 0:
        return np.zeros(0, dtype=bool)
    return np.ptp(cloud.points, axis=1) == 0


def drop_constant_points(cloud: PointCloud) -> Tuple[PointCloud, int]:
    mask = constant_mask(cloud)
    dropped = int(mask.sum())
    if dropped == 0:
        return cloud, 0
    return cloud.subset(np.flatnonzero(~mask)), dropped


def center_normalize(cloud: PointCloud, drop_constant: bool = False) -> PointCloud:
    """Medelvärdescentrera och normera varje punkt till längd 1.

    Konstanta punkter ger ConstantPoint, om inte drop_constant=True – då
    tas de bort (antalet fås via drop_constant_points).
    """
    mask = constant_mask(cloud)
    if mask.any():
        if not drop_constant:
            raise ConstantPoint(int(np.flatnonzero(mask)[0]))
        cloud, _ = drop_constant_points(cloud)
    pts = cloud.points - cloud.points.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(pts, axis=1, keepdims=True)
    return PointCloud(pts / norms, cloud.labels)


# ---------- Metriker ----------
def column_scales(cloud: PointCloud, mode: MetricMode | str) -> Optional[np.ndarray]:
    """Skalfaktorer per kolumn för VNE (None för euklidisk)."""
    mode = MetricMode.parse(mode)
    if mode is MetricMode.EUCLIDEAN:
        return None
    pts = cloud.points
    flat = np.ptp(pts, axis=0) == 0 if cloud.n else np.ones(cloud.d, dtype=bool)
    if flat.any():
        raise ZeroVarianceColumn(int(np.flatnonzero(flat)[0]))
    var = pts.var(axis=0)  # populationsvarians
    return var if mode is MetricMode.VNE_VARIANCE else np.sqrt(var)


def scaled_points(cloud: PointCloud, mode: MetricMode | str) -> np.ndarray:
    scales = column_scales(cloud, mode)
    return cloud.points if scales is None else cloud.points / scales


def pairwise_distances(cloud: PointCloud, mode: MetricMode | str = DEFAULT_METRIC) -> np.ndarray:
    if cloud.n < 1:
        raise ShapeError("avståndsmatris kräver minst en punkt")
    pts = scaled_points(cloud, mode)
    if cloud.n == 1:
        return np.zeros((1, 1))
    return squareform(pdist(pts, metric="euclidean"))


def distance_blocks(cloud: PointCloud, mode: MetricMode | str, block: int = DISTANCE_BLOCK_ROWS):
    """Ger (start, block_matrix) radvis så att n×n aldrig hålls i minnet."""
    pts = scaled_points(cloud, mode)
    for start in range(0, cloud.n, block):
        yield start, cdist(pts[start:start + block], pts, metric="euclidean")


# ---------- Extraktion ----------
def extract_spatial_filters(
    tensor: WeightTensor,
    channels: Optional[Sequence[int]] = None,
    source: str = "",
) -> PointCloud:
    """Varje (map i, kanal j) ger en w·h-dimensionell punkt, rad-major.

    Ingen normalisering här – pipelines anropar center_normalize själva.
    """
    arr = tensor.values.reshape(tensor.dnum, tensor.c, tensor.h, tensor.w)
    chans = list(range(tensor.c)) if channels is None else [int(j) for j in channels]
    for j in chans:
        if not 0 <= j < tensor.c:
            raise ShapeError(f"kanal {j} finns inte (c={tensor.c})")
    arr = arr[:, chans, :, :]
    pts = arr.reshape(tensor.dnum * len(chans), tensor.h * tensor.w)
    prefix = f"{source}/" if source else ""
    labels = tuple(f"{prefix}map{i}/chan{j}" for i in range(tensor.dnum) for j in chans)
    return PointCloud(pts, labels)
