# scripts/topology/persistence.py
"""
Vietoris–Rips-persistens i dimension 0 och 1 (koefficienter mod 2).

Simplexordning: (filtreringsvärde, dimension, lexikografiska hörn).
- Dim 0: union-find över kanter sorterade (värde, i, j).
- Dim 1: kolumnreduktion av den anti-transponerade randmatrisen, d.v.s.
  kogränskolumner för icke-MST-kanter i omvänd filtreringsordning, där
  pivoten är den tidigaste triangeln. Ger samma par som den vanliga
  reduktionen. Pivoter för många kanter tas fram blockvis i numpy och
  reducerade kolumner sparas bara för kanter som krävde full reduktion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from scripts.topology.errors import ComplexTooLarge
from scripts.topology.pointcloud import DEFAULT_METRIC, MetricMode, PointCloud, pairwise_distances
from scripts.topology.unionfind import UnionFind

EDGE_CAP = 2_000_000
INF = math.inf
# antal element per block vid pivotsökning
PIVOT_BLOCK = 500_000
# gräns för int64-nycklar
INT64_KEYS = 2**62
NO_KEY = np.iinfo(np.int64).max

Interval = Tuple[float, float]


@dataclass(frozen=True)
class RipsParams:
    maxdim: int = 1
    maxscale: Union[float, str] = "diameter"
    edge_cap: int = EDGE_CAP
    keep_zero: bool = False

    def __post_init__(self) -> None:
        if self.maxdim not in (0, 1):
            raise ValueError(f"maxdim måste vara 0 eller 1, fick {self.maxdim}")
        if isinstance(self.maxscale, str):
            if self.maxscale != "diameter":
                object.__setattr__(self, "maxscale", float(self.maxscale))
        if not isinstance(self.maxscale, str) and not float(self.maxscale) > 0.0:
            raise ValueError(f"maxscale måste vara > 0, fick {self.maxscale}")
        if self.edge_cap < 1:
            raise ValueError("edge_cap måste vara ≥ 1")


def _sort_key(iv: Interval) -> Tuple[float, float]:
    return (iv[0], iv[1])


@dataclass(frozen=True)
class Barcode:
    dim0: Tuple[Interval, ...] = ()
    dim1: Tuple[Interval, ...] = ()

    def __post_init__(self) -> None:
        for name in ("dim0", "dim1"):
            ivs = tuple((float(b), float(d)) for b, d in getattr(self, name))
            for b, d in ivs:
                if not b <= d:
                    raise ValueError(f"intervall [{b}, {d}] har födelse efter död")
            object.__setattr__(self, name, tuple(sorted(ivs, key=_sort_key)))

    def intervals(self, dim: int) -> Tuple[Interval, ...]:
        if dim == 0:
            return self.dim0
        if dim == 1:
            return self.dim1
        raise ValueError(f"dimension {dim} stöds inte (0 eller 1)")

    def lifetimes(self, dim: int, finite_only: bool = True) -> List[float]:
        out = [d - b for b, d in self.intervals(dim) if not (finite_only and math.isinf(d))]
        return sorted(out, reverse=True)


def max_lifetime(barcode: Barcode, dim: int = 1) -> float:
    """Största (död - födelse) bland ändliga intervall; 0 om inga finns."""
    lifes = barcode.lifetimes(dim, finite_only=True)
    return lifes[0] if lifes else 0.0


# ---------- Filtrering ----------
@dataclass
class _RipsComplex:
    n: int
    values: np.ndarray          # distinkta kantvärden, stigande
    rank: np.ndarray            # n×n: index i `values` (>= len(values) utanför komplexet)
    edges: np.ndarray           # (E, 2) i filtreringsordning
    edge_rank: np.ndarray       # (E,)
    max_rank: int = field(init=False)

    def __post_init__(self) -> None:
        self.max_rank = len(self.values) - 1

    def edge_value(self, pos: int) -> float:
        return float(self.values[self.edge_rank[pos]])


def _build_complex(D: np.ndarray, maxscale: float, edge_cap: int) -> _RipsComplex:
    n = D.shape[0]
    iu, ju = np.triu_indices(n, 1)
    dist = D[iu, ju]
    keep = dist <= maxscale
    count = int(keep.sum())
    if count > edge_cap:
        raise ComplexTooLarge(count, edge_cap)
    iu, ju, dist = iu[keep], ju[keep], dist[keep]
    values = np.unique(dist)
    rank = np.searchsorted(values, D).astype(np.int64)
    # värden över maxscale får en rang utanför komplexet
    rank[D > maxscale] = len(values)
    order = np.lexsort((ju, iu, dist))
    edges = np.stack([iu[order], ju[order]], axis=1).astype(np.int64)
    return _RipsComplex(n, values, rank, edges, rank[edges[:, 0], edges[:, 1]])


# ---------- Dim 0 ----------
def _dim0(cx: _RipsComplex) -> Tuple[List[Interval], np.ndarray]:
    uf = UnionFind(cx.n)
    negative = np.zeros(len(cx.edges), dtype=bool)
    ivs: List[Interval] = []
    for pos, (i, j) in enumerate(cx.edges):
        if uf.num_components == 1:
            break
        if uf.union(int(i), int(j)):
            negative[pos] = True
            ivs.append((0.0, cx.edge_value(pos)))
    ivs.extend((0.0, INF) for _ in range(uf.num_components))
    return ivs, negative


# ---------- Dim 1 ----------
class _Coboundary:
    """Kogränser av kanter som sorterade nyckelarrayer, nyckel = rang·n³ + lexnyckel."""

    def __init__(self, cx: _RipsComplex):
        self.cx = cx
        self.n = cx.n
        self.n2 = cx.n * cx.n
        self.n3 = self.n2 * cx.n  # python-int, ingen överspill
        self.all = np.arange(cx.n, dtype=np.int64)
        # för stora nycklar räknas med python-int
        self.wide = (cx.max_rank + 1) * self.n3 >= INT64_KEYS

    def _lex(self, i: np.ndarray, j: np.ndarray, ks: np.ndarray) -> np.ndarray:
        # i < j, triangeln (i, j, k) sorterad
        a = np.minimum(i, ks)
        c = np.maximum(j, ks)
        b = i + j + ks - a - c
        return a * self.n2 + b * self.n + c

    def keys(self, pos: int) -> np.ndarray:
        i, j = (int(v) for v in self.cx.edges[pos])
        ks = self.all[(self.all != i) & (self.all != j)]
        R = self.cx.rank
        rk = np.maximum(self.cx.edge_rank[pos], np.maximum(R[i, ks], R[j, ks]))
        inside = rk <= self.cx.max_rank
        ks, rk = ks[inside], rk[inside]
        lex = self._lex(np.int64(i), np.int64(j), ks)
        if self.wide:
            return np.sort(rk.astype(object) * self.n3 + lex.astype(object))
        return np.sort(rk * self.n3 + lex)

    def lowest(self, positions: np.ndarray) -> List[Optional[int]]:
        """Tidigaste kofacett för varje kant i `positions`, None om kogränsen är tom."""
        if self.wide:
            return [int(k[0]) if k.size else None for k in map(self.keys, positions.tolist())]
        I = self.cx.edges[positions, 0][:, None]
        J = self.cx.edges[positions, 1][:, None]
        R = self.cx.rank
        rk = np.maximum(self.cx.edge_rank[positions][:, None], np.maximum(R[I[:, 0]], R[J[:, 0]]))
        ks = self.all[None, :]
        key = rk * self.n3 + self._lex(I, J, ks)
        outside = (rk > self.cx.max_rank) | (ks == I) | (ks == J)
        key[outside] = NO_KEY
        low = key.min(axis=1)
        return [None if k == NO_KEY else k for k in low.tolist()]

    def value(self, key: int) -> float:
        return float(self.cx.values[int(key) // self.n3])


def _dim1(cx: _RipsComplex, negative: np.ndarray) -> List[Interval]:
    cob = _Coboundary(cx)
    pivots: Dict[int, int] = {}
    # reducerade kolumner för kanter som krävde full reduktion
    reduced: Dict[int, np.ndarray] = {}
    ivs: List[Interval] = []

    def column_of(pos: int) -> np.ndarray:
        col = reduced.get(pos)
        return cob.keys(pos) if col is None else col

    # clearing: MST-kanter dödar H0
    order = np.flatnonzero(~negative)[::-1]
    block = max(1, PIVOT_BLOCK // cx.n)
    for start in range(0, len(order), block):
        chunk = order[start:start + block]
        for pos, low in zip(chunk.tolist(), cob.lowest(chunk)):
            birth = cx.edge_value(pos)
            if low is None:
                ivs.append((birth, INF))
                continue
            if low not in pivots:
                pivots[low] = pos
                ivs.append((birth, cob.value(low)))
                continue
            # full reduktion
            column = cob.keys(pos)
            while column.size:
                other = pivots.get(int(column[0]))
                if other is None:
                    break
                column = np.setxor1d(column, column_of(other), assume_unique=True)
            if column.size:
                low = int(column[0])
                pivots[low] = pos
                reduced[pos] = column
                ivs.append((birth, cob.value(low)))
            else:
                ivs.append((birth, INF))
    return ivs


def rips_barcodes(
    cloud: PointCloud,
    mode: MetricMode | str = DEFAULT_METRIC,
    params: RipsParams = RipsParams(),
) -> Barcode:
    if cloud.n < 1:
        raise ValueError("persistens kräver minst en punkt")
    if cloud.n == 1:
        return Barcode(dim0=((0.0, INF),))
    D = pairwise_distances(cloud, mode)
    maxscale = float(D.max()) if params.maxscale == "diameter" else float(params.maxscale)
    cx = _build_complex(D, maxscale, params.edge_cap)
    dim0, negative = _dim0(cx)
    dim1 = _dim1(cx, negative) if params.maxdim >= 1 else []
    if not params.keep_zero:
        dim0 = [iv for iv in dim0 if iv[1] > iv[0]]
        dim1 = [iv for iv in dim1 if iv[1] > iv[0]]
    return Barcode(tuple(dim0), tuple(dim1))


def dominant_intervals(barcode: Barcode, dim: int = 1, ratio: float = 3.0) -> List[Interval]:
    """De längsta intervallen fram till första glappet där livslängden faller
    med minst en faktor `ratio`."""
    ivs = sorted(
        (iv for iv in barcode.intervals(dim) if not math.isinf(iv[1])),
        key=lambda iv: iv[1] - iv[0],
        reverse=True,
    )
    lifes = [d - b for b, d in ivs]
    for i, life in enumerate(lifes):
        nxt = lifes[i + 1] if i + 1 < len(lifes) else 0.0
        if life > 0 and life >= ratio * nxt:
            return ivs[:i + 1]
    return []
