# scripts/topology/filterbank.py
"""
Idealiserade 3×3-filterbanker och förbehandlingen som lägger till filtersvar
som extra bildkanaler.

Rutnät: (x, y) ∈ {-1, 0, 1}², rad = y, kolumn = x (rad-major).
- primary_circle: F = cos θ·x + sin θ·y
- klein_bottle:   F = cos φ·u + sin φ·(2u² - 1), u = cos θ·x + sin θ·y
- gaussian:       N(0, 1) per element, numpy default_rng (PCG64) från seed
Alla filter medelvärdescentreras och normeras till längd 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.ndimage import correlate
from scipy.spatial.distance import pdist, squareform

from scripts.topology.errors import ChannelMismatch, ShapeError
from scripts.topology.pointcloud import PointCloud, WeightTensor, center_normalize

GRID = np.array([-1.0, 0.0, 1.0])
# ys[r, c] = GRID[r], xs[r, c] = GRID[c]
YS, XS = np.meshgrid(GRID, GRID, indexing="ij")

DEDUP_TOL = 1e-9
GRAYSCALE_WEIGHTS = (0.2989, 0.5870, 0.1140)

KINDS = ("primary_circle", "klein_bottle", "three_circle", "gaussian")
# banker inlästa från fil saknar genereringsparametrar
LOADED_KIND = "loaded"


@dataclass(frozen=True)
class FilterBank:
    filters: np.ndarray                      # (n, 3, 3)
    kind: str
    params: Dict[str, object] = field(default_factory=dict)
    angles: Optional[np.ndarray] = None      # (n, 2): (θ, φ) där det finns
    dedup_count: int = 0

    def __post_init__(self) -> None:
        f = np.asarray(self.filters, dtype=np.float64)
        if f.ndim != 3 or f.shape[1:] != (3, 3):
            raise ShapeError(f"filterbank måste ha form (n, 3, 3), fick {f.shape}")
        object.__setattr__(self, "filters", f)
        if self.kind not in KINDS and self.kind != LOADED_KIND:
            raise ValueError(f"okänd filterbank '{self.kind}'")

    @property
    def n(self) -> int:
        return int(self.filters.shape[0])

    def __len__(self) -> int:
        return self.n

    def as_point_cloud(self) -> PointCloud:
        labels = tuple(f"{self.kind}/{i}" for i in range(self.n))
        return PointCloud(self.filters.reshape(self.n, 9), labels)

    def as_weight_tensor(self) -> WeightTensor:
        """WTS1-layout: w = h = 3, c = 1, dnum = n."""
        return WeightTensor(3, 3, 1, self.n, self.filters.reshape(-1))


@dataclass(frozen=True)
class ImageTensor:
    values: np.ndarray  # (H, W, C)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 2:
            v = v[:, :, None]
        if v.ndim != 3 or min(v.shape) < 1:
            raise ShapeError(f"bilden måste ha form (H, W, C), fick {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def channels(self) -> int:
        return int(self.values.shape[2])


def _normalized(raw: np.ndarray) -> np.ndarray:
    cloud = center_normalize(PointCloud(raw.reshape(len(raw), 9)))
    return cloud.points.reshape(-1, 3, 3)


def _edge(theta: float) -> np.ndarray:
    return math.cos(theta) * XS + math.sin(theta) * YS


# ---------- Banker ----------
def primary_circle_bank(n: int) -> FilterBank:
    if n < 1:
        raise ValueError(f"n måste vara ≥ 1, fick {n}")
    thetas = 2.0 * math.pi * np.arange(n) / n
    raw = np.stack([_edge(t) for t in thetas])
    angles = np.stack([thetas, np.zeros(n)], axis=1)
    return FilterBank(_normalized(raw), "primary_circle", {"n": n}, angles)


def _klein_raw(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    out = []
    for theta, phi in zip(thetas, phis):
        u = _edge(theta)
        out.append(math.cos(phi) * u + math.sin(phi) * (2.0 * u * u - 1.0))
    return np.stack(out)


def klein_patches(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Normerade Klein-filter (n, 3, 3) för givna vinkelpar, utan dedup."""
    return _normalized(_klein_raw(np.asarray(thetas, dtype=np.float64), np.asarray(phis, dtype=np.float64)))


def _dedup(filters: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Index för första förekomsten av varje filter (avstånd < tol räknas som dubblett)."""
    n = len(filters)
    if n < 2:
        return np.arange(n)
    D = squareform(pdist(filters.reshape(n, 9)))
    keep = []
    dropped = np.zeros(n, dtype=bool)
    for i in range(n):
        if dropped[i]:
            continue
        keep.append(i)
        dropped |= D[i] < tol
    return np.asarray(keep, dtype=np.int64)


def klein_bottle_bank(n_theta: int, n_phi: int) -> FilterBank:
    """θ över ett halvt varv (θ+π ger samma yta via Klein-identifieringen)."""
    if n_theta < 1 or n_phi < 1:
        raise ValueError(f"n_theta och n_phi måste vara ≥ 1, fick {n_theta}, {n_phi}")
    ti, pj = np.meshgrid(np.arange(n_theta), np.arange(n_phi), indexing="ij")
    thetas = math.pi * ti.reshape(-1) / n_theta
    phis = 2.0 * math.pi * pj.reshape(-1) / n_phi
    filters = _normalized(_klein_raw(thetas, phis))
    keep = _dedup(filters)
    angles = np.stack([thetas, phis], axis=1)[keep]
    params = {"n_theta": n_theta, "n_phi": n_phi}
    return FilterBank(filters[keep], "klein_bottle", params, angles, len(filters) - len(keep))


def three_circle_bank(n_theta: int, n_phi: int) -> FilterBank:
    """Primärcirkeln (φ ∈ {0, π}) plus sekundärcirklarna θ = 0 och θ = π/2."""
    if n_theta % 2 or n_phi % 2:
        raise ValueError("three_circle kräver jämna n_theta och n_phi")
    bank = klein_bottle_bank(n_theta, n_phi)
    ti = np.rint(bank.angles[:, 0] * n_theta / math.pi).astype(int)
    pj = np.rint(bank.angles[:, 1] * n_phi / (2.0 * math.pi)).astype(int)
    mask = (pj == 0) | (pj == n_phi // 2) | (ti == 0) | (ti == n_theta // 2)
    return FilterBank(
        bank.filters[mask], "three_circle", dict(bank.params), bank.angles[mask], bank.dedup_count
    )


def edge_slice(bank: FilterBank) -> FilterBank:
    """Filtren med φ ∈ {0, π} – rena kanter."""
    if bank.angles is None:
        raise ValueError("banken saknar vinklar")
    phi = np.mod(bank.angles[:, 1], 2.0 * math.pi)
    mask = np.isclose(phi, 0.0) | np.isclose(phi, math.pi) | np.isclose(phi, 2.0 * math.pi)
    return FilterBank(bank.filters[mask], bank.kind, dict(bank.params), bank.angles[mask])


def gaussian_bank(n: int, seed: int = 0) -> FilterBank:
    if n < 1:
        raise ValueError(f"n måste vara ≥ 1, fick {n}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, 3, 3))
    return FilterBank(_normalized(raw), "gaussian", {"n": n, "seed": seed})


def make_bank(kind: str, n: int = 64, seed: int = 0,
              n_theta: Optional[int] = None, n_phi: Optional[int] = None) -> FilterBank:
    """Fabrik för CLI:t. För Klein-varianterna härleds n_theta×n_phi ur n om de saknas."""
    if kind == "primary_circle":
        return primary_circle_bank(n)
    if kind == "gaussian":
        return gaussian_bank(n, seed)
    if n_theta is None or n_phi is None:
        side = max(2, 2 * round(math.sqrt(n) / 2))
        n_theta = n_theta or side
        n_phi = n_phi or max(2, 2 * round(n / n_theta / 2))
    if kind == "klein_bottle":
        return klein_bottle_bank(n_theta, n_phi)
    if kind == "three_circle":
        return three_circle_bank(n_theta, n_phi)
    raise ValueError(f"okänd filterbank '{kind}' (välj bland: {', '.join(KINDS)})")


# ---------- Förbehandling ----------
def to_grayscale(image: ImageTensor, weights: Sequence[float] = GRAYSCALE_WEIGHTS) -> ImageTensor:
    if image.channels == 1:
        return image
    if image.channels != len(weights):
        raise ChannelMismatch(image.channels, len(weights))
    return ImageTensor(image.values @ np.asarray(weights, dtype=np.float64))


def append_filter_features(image: ImageTensor, bank: FilterBank) -> ImageTensor:
    """Kanal 0 = bilden, kanal 1+i = skalärprodukt mellan filter i och 3×3-patchen
    centrerad i pixeln (nollutfyllnad vid kanterna)."""
    if image.channels != 1:
        raise ChannelMismatch(image.channels)
    base = image.values[:, :, 0]
    extra = [correlate(base, f, mode="constant", cval=0.0) for f in bank.filters]
    return ImageTensor(np.stack([base, *extra], axis=2))


def bank_from_tensor(tensor: WeightTensor) -> FilterBank:
    """Läs tillbaka en bank ur WTS1 (w = h = 3, c = 1)."""
    if (tensor.w, tensor.h, tensor.c) != (3, 3, 1):
        raise ShapeError(f"filterbank kräver w = h = 3 och c = 1, fick {tensor.w}×{tensor.h}×{tensor.c}")
    filters = tensor.values.reshape(tensor.dnum, 3, 3)
    return FilterBank(filters, LOADED_KIND, {"n": tensor.dnum})
