# scripts/topology/mapper.py
"""
Mapper: PCA-lins -> överlappande täckning -> single linkage per bin -> graf.

- Mapper(resolution, gain): resolution bins per linsaxel, överlapp 1 - 1/gain
- Noder = kluster (medlemmar, storlek, normerad medelvektor)
- Kanter = par av kluster som delar minst en punkt
- Nodordning: (bin-index, minsta medlem)
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist, squareform

from scripts.topology.errors import DegenerateCovariance, EmptyCloud, ZeroRange
from scripts.topology.pointcloud import DEFAULT_METRIC, MetricMode, PointCloud, scaled_points

DEFAULT_SLC_BINS = 10
# relativ tolerans för egenvärden som räknas som noll
EIGEN_RTOL = 1e-12


@dataclass(frozen=True)
class MapperParams:
    resolution: int = 30
    gain: float = 3.0
    metric: MetricMode = DEFAULT_METRIC
    lens_dims: int = 2
    slc_bins: int = DEFAULT_SLC_BINS

    def __post_init__(self) -> None:
        object.__setattr__(self, "metric", MetricMode.parse(self.metric))
        if int(self.resolution) != self.resolution or self.resolution < 1:
            raise ValueError(f"resolution måste vara ≥ 1, fick {self.resolution}")
        if not float(self.gain) > 1.0:
            raise ValueError(f"gain måste vara > 1, fick {self.gain}")
        if self.lens_dims not in (1, 2):
            raise ValueError(f"lens_dims måste vara 1 eller 2, fick {self.lens_dims}")
        if int(self.slc_bins) != self.slc_bins or self.slc_bins < 1:
            raise ValueError(f"slc_bins måste vara ≥ 1, fick {self.slc_bins}")

    @property
    def overlap(self) -> float:
        return 1.0 - 1.0 / self.gain

    def notation(self) -> str:
        return f"Mapper({self.resolution},{self.gain:g})"


@dataclass(frozen=True)
class Interval:
    center: float
    length: float

    @property
    def lo(self) -> float:
        return self.center - self.length / 2.0

    @property
    def hi(self) -> float:
        return self.center + self.length / 2.0


@dataclass(frozen=True)
class CoverAxis:
    """En linsaxel: `resolution` intervall med steg `step` från `origin`.

    Intervall i täcker [i + 0.5 - gain/2, i + 0.5 + gain/2) i enheter av steget,
    det sista är stängt uppåt. För gain ≤ 2 ligger en punkt i högst två intervall.
    """

    origin: float
    step: float
    resolution: int
    gain: float

    @property
    def intervals(self) -> Tuple[Interval, ...]:
        return tuple(
            Interval(self.origin + (i + 0.5) * self.step, self.gain * self.step) for i in range(self.resolution)
        )

    def units(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.origin) / self.step

    def mask(self, values: np.ndarray, i: int) -> np.ndarray:
        t = self.units(values)
        half = self.gain / 2.0
        lo, hi = i + 0.5 - half, i + 0.5 + half
        if i == self.resolution - 1:
            return (t >= lo) & (t <= hi)
        return (t >= lo) & (t < hi)


@dataclass(frozen=True)
class Cover:
    grid: Tuple[CoverAxis, ...]

    @property
    def axes(self) -> Tuple[Tuple[Interval, ...], ...]:
        return tuple(ax.intervals for ax in self.grid)

    @property
    def dims(self) -> int:
        return len(self.grid)

    def overlap_fraction(self, axis: int = 0) -> List[float]:
        """Uppmätt överlapp mellan grannintervall, som andel av intervallängden."""
        ivs = self.axes[axis]
        return [(a.hi - b.lo) / a.length for a, b in zip(ivs, ivs[1:])]

    def bins(self) -> List[Tuple[int, ...]]:
        return list(itertools.product(*(range(ax.resolution) for ax in self.grid)))

    def members(self, lens_values: np.ndarray, key: Tuple[int, ...]) -> np.ndarray:
        lens = np.asarray(lens_values, dtype=np.float64).reshape(len(lens_values), -1)
        mask = np.ones(lens.shape[0], dtype=bool)
        for axis, i in enumerate(key):
            mask &= self.grid[axis].mask(lens[:, axis], i)
        return np.flatnonzero(mask)

    def bins_of(self, value: Sequence[float]) -> List[Tuple[int, ...]]:
        """Alla bin som innehåller en enskild linspunkt."""
        point = np.asarray(value, dtype=np.float64).reshape(1, -1)
        return [key for key in self.bins() if self.members(point, key).size]


@dataclass(frozen=True)
class MapperNode:
    id: int
    members: Tuple[int, ...]
    mean: Tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def color(self) -> int:
        """Färgvärde i ritningar: antal punkter i klustret."""
        return self.size


@dataclass(frozen=True)
class MapperGraph:
    nodes: Tuple[MapperNode, ...]
    edges: Tuple[Tuple[int, int], ...]

    @property
    def sizes(self) -> List[int]:
        return [node.size for node in self.nodes]


# ---------- Lins ----------
def pca_lens(cloud: PointCloud, dims: int = 2) -> np.ndarray:
    """Projektion på de `dims` största egenvektorerna av populationskovariansen.

    Tecknet fixeras så att varje egenvektors största komponent (belopp) är positiv.
    """
    if dims not in (1, 2):
        raise ValueError(f"dims måste vara 1 eller 2, fick {dims}")
    if cloud.d < dims:
        raise ValueError(f"punktdimension {cloud.d} < {dims}")
    if cloud.n < 2:
        raise DegenerateCovariance(0, dims)
    X = cloud.points - cloud.points.mean(axis=0)
    cov = X.T @ X / cloud.n
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals, kind="stable")[::-1]
    vals, vecs = vals[order], vecs[:, order]
    top = vals[0]
    rank = int(np.sum(vals > max(top, 0.0) * EIGEN_RTOL)) if top > 0 else 0
    if rank < dims:
        raise DegenerateCovariance(rank, dims)
    vecs = vecs[:, :dims].copy()
    for j in range(dims):
        if vecs[np.argmax(np.abs(vecs[:, j])), j] < 0:
            vecs[:, j] = -vecs[:, j]
    return X @ vecs


# ---------- Täckning ----------
def build_cover(lens_values: np.ndarray, resolution: int, gain: float) -> Cover:
    lens = np.asarray(lens_values, dtype=np.float64)
    if lens.ndim == 1:
        lens = lens[:, None]
    if lens.shape[0] < 1:
        raise EmptyCloud()
    if not gain > 1.0:
        raise ValueError(f"gain måste vara > 1, fick {gain}")
    if resolution < 1:
        raise ValueError(f"resolution måste vara ≥ 1, fick {resolution}")
    axes = []
    for axis in range(lens.shape[1]):
        lo, hi = float(lens[:, axis].min()), float(lens[:, axis].max())
        span = hi - lo
        if span <= 0.0:
            raise ZeroRange(axis)
        axes.append(CoverAxis(lo, span / resolution, int(resolution), float(gain)))
    return Cover(tuple(axes))


# ---------- Klustring ----------
def histogram_threshold(merges: np.ndarray, slc_bins: int) -> Optional[float]:
    """Tröskel = vänsterkant på första tomma bin ovanför första icke-tomma bin.

    None betyder "ingen lucka" – allt blir ett kluster.
    """
    top = float(merges.max()) if merges.size else 0.0
    if top <= 0.0:
        return None
    counts, edges = np.histogram(merges, bins=slc_bins, range=(0.0, top))
    first = int(np.flatnonzero(counts)[0])
    gaps = np.flatnonzero(counts[first:] == 0)
    if gaps.size == 0:
        return None
    return float(edges[first + gaps[0]])


def single_linkage_clusters(
    indices: Sequence[int],
    distances: np.ndarray,
    slc_bins: int = DEFAULT_SLC_BINS,
) -> List[List[int]]:
    """Single linkage på `indices` (rader/kolumner i `distances`), kapat med histogramheuristiken."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        raise ValueError("single linkage kräver minst en punkt")
    if idx.size == 1:
        return [[int(idx[0])]]
    sub = np.asarray(distances)[np.ix_(idx, idx)]
    Z = linkage(squareform(sub, checks=False), method="single")
    threshold = histogram_threshold(Z[:, 2], slc_bins)
    if threshold is None:
        return [sorted(int(i) for i in idx)]
    labels = fcluster(Z, t=threshold, criterion="distance")
    groups: Dict[int, List[int]] = {}
    for pos, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(int(idx[pos]))
    clusters = [sorted(g) for g in groups.values()]
    return sorted(clusters, key=lambda c: c[0])


# ---------- Graf ----------
def _node_mean(points: np.ndarray) -> Tuple[float, ...]:
    mean = points.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm > 0.0:
        mean = mean / norm
    return tuple(float(x) for x in mean)


def _edges_from_members(nodes: Sequence[MapperNode], n_points: int) -> Tuple[Tuple[int, int], ...]:
    by_point: List[List[int]] = [[] for _ in range(n_points)]
    for node in nodes:
        for m in node.members:
            by_point[m].append(node.id)
    edges: Set[Tuple[int, int]] = set()
    for ids in by_point:
        for a, b in itertools.combinations(sorted(ids), 2):
            edges.add((a, b))
    return tuple(sorted(edges))


def mapper_graph(
    cloud: PointCloud,
    params: MapperParams = MapperParams(),
    lens_values: Optional[np.ndarray] = None,
) -> MapperGraph:
    """Hela Mapper-konstruktionen. `lens_values` kan ges för att återanvända en lins."""
    if cloud.n == 0:
        raise EmptyCloud()
    if cloud.n == 1:
        node = MapperNode(0, (0,), _node_mean(cloud.points))
        return MapperGraph((node,), ())
    lens = pca_lens(cloud, params.lens_dims) if lens_values is None else np.asarray(lens_values)
    cover = build_cover(lens, params.resolution, params.gain)
    pts = scaled_points(cloud, params.metric)

    nodes: List[MapperNode] = []
    for key in cover.bins():
        members = cover.members(lens, key)
        if members.size == 0:
            continue
        local = squareform(pdist(pts[members], metric="euclidean")) if members.size > 1 else np.zeros((1, 1))
        for cluster in single_linkage_clusters(range(members.size), local, params.slc_bins):
            ids = tuple(int(members[i]) for i in cluster)
            nodes.append(MapperNode(len(nodes), ids, _node_mean(cloud.points[list(ids)])))
    return MapperGraph(tuple(nodes), _edges_from_members(nodes, cloud.n))


# ---------- Grafstatistik ----------
def as_nx_graph(graph: MapperGraph) -> nx.Graph:
    G = nx.Graph()
    for node in graph.nodes:
        G.add_node(node.id, size=node.size)
    G.add_edges_from(graph.edges)
    return G


def connected_components(graph: MapperGraph) -> int:
    return nx.number_connected_components(as_nx_graph(graph))


def cycle_rank(graph: MapperGraph) -> int:
    """|E| - |V| + antal komponenter."""
    return len(graph.edges) - len(graph.nodes) + connected_components(graph)


def _gf2_rank(columns: Sequence[int]) -> int:
    pivots: Dict[int, int] = {}
    rank = 0
    for col in columns:
        while col:
            top = col.bit_length() - 1
            if top in pivots:
                col ^= pivots[top]
            else:
                pivots[top] = col
                rank += 1
                break
    return rank


def nerve_triangles(graph: MapperGraph) -> List[Tuple[int, int, int]]:
    """Trianglar vars tre kluster delar en gemensam punkt."""
    by_point: Dict[int, List[int]] = {}
    for node in graph.nodes:
        for m in node.members:
            by_point.setdefault(m, []).append(node.id)
    tris: Set[Tuple[int, int, int]] = set()
    for ids in by_point.values():
        if len(ids) >= 3:
            tris.update(itertools.combinations(sorted(ids), 3))
    return sorted(tris)


def loop_rank(graph: MapperGraph) -> int:
    """Första Betti-talet (GF(2)) för Mapper-nervens 2-skelett."""
    edge_pos = {e: i for i, e in enumerate(graph.edges)}
    columns = [
        (1 << edge_pos[(a, b)]) | (1 << edge_pos[(a, c)]) | (1 << edge_pos[(b, c)])
        for a, b, c in nerve_triangles(graph)
    ]
    return cycle_rank(graph) - _gf2_rank(columns)
