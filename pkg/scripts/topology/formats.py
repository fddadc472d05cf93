# scripts/topology/formats.py
"""
Filformat och inläsning av punktmoln.

- WTS1: b"WTS1" + 4 × <u4 (w, h, c, dnum) + w·h·c·dnum × <f4
        (map -> kanal -> rad -> kolumn)
- IMG1: b"IMG1" + 3 × <u4 (H, W, C) + H·W·C × <f4 (rad-major, kanal innerst)
- CSV:  en punkt per rad, kommaseparerat, ev. icke-numerisk rubrikrad
Alla skrivningar är atomära (tempfil i samma katalog + os.replace).
"""
from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from scripts.topology.errors import ParseError, ShapeError
from scripts.topology.filterbank import ImageTensor
from scripts.topology.pointcloud import PointCloud, WeightTensor, extract_spatial_filters

PathLike = Union[str, Path]

WTS1_MAGIC = b"WTS1"
IMG1_MAGIC = b"IMG1"
FORMATS = ("wts1", "csv", "img1")


# ---------- Atomär skrivning ----------
def write_bytes_atomic(path: PathLike, data: bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# ---------- Binärt ----------
def _header(data: bytes, magic: bytes, count: int, location: str) -> List[int]:
    if len(data) < 4 or data[:4] != magic:
        raise ParseError(f"{location} offset 0", f"fel magic, förväntade {magic.decode()}")
    end = 4 + 4 * count
    if len(data) < end:
        raise ParseError(f"{location} offset {len(data)}", "trunkerad rubrik")
    return [int(v) for v in np.frombuffer(data, dtype="<u4", count=count, offset=4)]


def _payload(data: bytes, offset: int, count: int, location: str) -> np.ndarray:
    expected = offset + 4 * count
    if len(data) < expected:
        raise ParseError(f"{location} offset {len(data)}", f"trunkerad data, förväntade {expected} byte")
    if len(data) > expected:
        raise ParseError(f"{location} offset {expected}", f"{len(data) - expected} överflödiga byte")
    return np.frombuffer(data, dtype="<f4", count=count, offset=offset).astype(np.float64)


def parse_wts1(data: bytes, location: str = "WTS1") -> WeightTensor:
    w, h, c, dnum = _header(data, WTS1_MAGIC, 4, location)
    values = _payload(data, 20, w * h * c * dnum, location)
    try:
        return WeightTensor(w, h, c, dnum, values)
    except ShapeError as exc:
        raise ShapeError(exc.reason, location) from None


def wts1_bytes(tensor: WeightTensor) -> bytes:
    head = np.array([tensor.w, tensor.h, tensor.c, tensor.dnum], dtype="<u4").tobytes()
    return WTS1_MAGIC + head + np.asarray(tensor.values, dtype="<f4").tobytes()


def read_wts1(path: PathLike) -> WeightTensor:
    path = Path(path)
    return parse_wts1(path.read_bytes(), str(path))


def write_wts1(path: PathLike, tensor: WeightTensor) -> Path:
    return write_bytes_atomic(path, wts1_bytes(tensor))


def parse_img1(data: bytes, location: str = "IMG1") -> ImageTensor:
    h, w, c = _header(data, IMG1_MAGIC, 3, location)
    if min(h, w, c) < 1:
        raise ShapeError(f"H, W och C måste vara ≥ 1, fick {h}×{w}×{c}", location)
    values = _payload(data, 16, h * w * c, location)
    return ImageTensor(values.reshape(h, w, c))


def img1_bytes(image: ImageTensor) -> bytes:
    head = np.array([image.height, image.width, image.channels], dtype="<u4").tobytes()
    return IMG1_MAGIC + head + np.asarray(image.values, dtype="<f4").tobytes()


def read_img1(path: PathLike) -> ImageTensor:
    path = Path(path)
    return parse_img1(path.read_bytes(), str(path))


def write_img1(path: PathLike, image: ImageTensor) -> Path:
    return write_bytes_atomic(path, img1_bytes(image))


# ---------- CSV ----------
def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _is_finite(cell: str) -> bool:
    return _is_number(cell) and math.isfinite(float(cell))


def read_csv_points(path: PathLike) -> np.ndarray:
    """Läs en CSV-fil till en n×d-matris. Rubrikrad hoppas över om den inte är numerisk."""
    path = Path(path)
    try:
        df = pd.read_csv(
            path, header=None, dtype=str, keep_default_na=False,
            skip_blank_lines=True, skipinitialspace=True,
        )
    except pd.errors.EmptyDataError:
        return np.zeros((0, 1))
    except pd.errors.ParserError as exc:
        raise ShapeError(f"ojämn radbredd ({exc})", str(path)) from None
    df = df.fillna("")
    header_offset = 1
    if len(df) and not all(_is_number(c) for c in df.iloc[0] if c != ""):
        df = df.iloc[1:]
        header_offset = 2
    cells = df.apply(lambda col: col.str.strip())
    ragged = cells.eq("").any(axis=1)
    if ragged.any():
        pos = int(np.flatnonzero(ragged.to_numpy())[0])
        raise ShapeError(f"rad {pos + header_offset} har färre fält än rad {header_offset}", str(path))
    for check, reason in ((_is_number, "icke-numeriskt värde"), (_is_finite, "nan eller oändligt värde")):
        bad = ~cells.apply(lambda col: col.map(check)).all(axis=1)
        if bad.any():
            pos = int(np.flatnonzero(bad.to_numpy())[0])
            raise ParseError(f"{path} rad {pos + header_offset}", reason)
    # float() per cell: exakt tillbakaläsning av write_cloud_csv
    return cells.to_numpy(dtype=object).astype(np.float64)


def write_cloud_csv(path: PathLike, cloud: PointCloud) -> Path:
    df = pd.DataFrame(cloud.points, columns=[f"x{j}" for j in range(cloud.d)])
    return write_bytes_atomic(path, df.to_csv(index=False, lineterminator="\n").encode("utf-8"))


# ---------- Inläsning av punktmoln ----------
def infer_format(path: PathLike) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in FORMATS:
        raise ValueError(f"kan inte avgöra format för '{path}' (ange ett av: {', '.join(FORMATS)})")
    return suffix


def _load_one(path: Path, fmt: str, channels: Optional[Sequence[int]]) -> PointCloud:
    stem = path.stem
    if fmt == "wts1":
        return extract_spatial_filters(read_wts1(path), channels, source=stem)
    if fmt == "img1":
        image = read_img1(path)
        pts = image.values.reshape(image.height * image.width, image.channels)
        labels = tuple(f"{stem}/r{r}/c{c}" for r in range(image.height) for c in range(image.width))
        return PointCloud(pts, labels)
    if fmt == "csv":
        pts = read_csv_points(path)
        return PointCloud(pts, tuple(f"{stem}/row{i}" for i in range(pts.shape[0])))
    raise ValueError(f"okänt format '{fmt}' (välj bland: {', '.join(FORMATS)})")


def load_point_cloud(
    paths: Union[PathLike, Iterable[PathLike]],
    fmt: Optional[str] = None,
    channels: Optional[Sequence[int]] = None,
) -> PointCloud:
    """Läs en eller flera filer och slå ihop dem i ordning (etiketter prefixas med filnamnet)."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    clouds = []
    for p in paths:
        p = Path(p)
        if not p.exists():
            raise FileNotFoundError(f"Hittar inte filen: {p}")
        clouds.append(_load_one(p, fmt or infer_format(p), channels))
    return PointCloud.concat(clouds)
