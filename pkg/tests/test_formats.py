from __future__ import annotations

import struct

import numpy as np
import pytest

from scripts.topology.errors import ParseError, ShapeError
from scripts.topology.filterbank import ImageTensor
from scripts.topology.formats import (
    img1_bytes,
    load_point_cloud,
    parse_img1,
    parse_wts1,
    read_csv_points,
    write_cloud_csv,
    write_img1,
    write_wts1,
    wts1_bytes,
)
from scripts.topology.pointcloud import PointCloud, WeightTensor


def _wts1(w, h, c, dnum, values):
    return b"WTS1" + struct.pack("<4I", w, h, c, dnum) + struct.pack(f"<{len(values)}f", *values)


# ---------- WTS1 ----------
def test_wts1_layout_by_hand():
    data = _wts1(3, 3, 2, 2, list(range(36)))
    tensor = parse_wts1(data)
    assert (tensor.w, tensor.h, tensor.c, tensor.dnum) == (3, 3, 2, 2)
    assert wts1_bytes(tensor) == data


def test_wts1_to_cloud(tmp_path):
    path = tmp_path / "layer.wts1"
    path.write_bytes(_wts1(3, 3, 2, 2, list(range(36))))
    cloud = load_point_cloud(path)
    assert (cloud.n, cloud.d) == (4, 9)
    assert cloud.labels[3] == "layer/map1/chan1"
    np.testing.assert_array_equal(cloud.points[3], np.arange(27, 36))


def test_wts1_bad_magic():
    with pytest.raises(ParseError) as err:
        parse_wts1(b"WTS2" + bytes(16))
    assert "offset 0" in err.value.location


def test_wts1_truncated():
    data = _wts1(3, 3, 1, 2, list(range(18)))
    with pytest.raises(ParseError) as err:
        parse_wts1(data[:-3])
    assert f"offset {len(data) - 3}" in err.value.location
    with pytest.raises(ParseError):
        parse_wts1(data[:10])


def test_wts1_trailing_bytes():
    with pytest.raises(ParseError):
        parse_wts1(_wts1(3, 3, 1, 1, list(range(9))) + b"\x00")


def test_wts1_zero_dimension():
    with pytest.raises(ShapeError):
        parse_wts1(_wts1(3, 3, 0, 1, []))


def test_multiple_inputs_concatenate_in_order(tmp_path):
    for name, start in (("a", 0), ("b", 100)):
        write_wts1(tmp_path / f"{name}.wts1", WeightTensor(3, 3, 1, 2, np.arange(start, start + 18.0)))
    cloud = load_point_cloud([tmp_path / "a.wts1", tmp_path / "b.wts1"])
    assert cloud.n == 4
    assert [lab.split("/")[0] for lab in cloud.labels] == ["a", "a", "b", "b"]
    assert cloud.points[2, 0] == 100.0


def test_channel_selection(tmp_path):
    write_wts1(tmp_path / "rgb.wts1", WeightTensor(3, 3, 3, 4, np.arange(108.0)))
    cloud = load_point_cloud(tmp_path / "rgb.wts1", channels=[0])
    assert cloud.n == 4
    assert all(lab.endswith("chan0") for lab in cloud.labels)


# ---------- IMG1 ----------
def test_img1_layout():
    values = np.arange(2 * 3 * 2, dtype=float).reshape(2, 3, 2)
    data = img1_bytes(ImageTensor(values))
    assert data[:16] == b"IMG1" + struct.pack("<3I", 2, 3, 2)
    # rad-major, kanal innerst
    assert struct.unpack("<2f", data[16:24]) == (0.0, 1.0)
    np.testing.assert_array_equal(parse_img1(data).values, values)


def test_img1_as_point_cloud(tmp_path):
    write_img1(tmp_path / "im.img1", ImageTensor(np.arange(12.0).reshape(2, 2, 3)))
    cloud = load_point_cloud(tmp_path / "im.img1")
    assert (cloud.n, cloud.d) == (4, 3)
    assert cloud.labels[1] == "im/r0/c1"
    np.testing.assert_array_equal(cloud.points[1], [3.0, 4.0, 5.0])


def test_img1_truncated():
    data = img1_bytes(ImageTensor(np.ones((2, 2, 1))))
    with pytest.raises(ParseError):
        parse_img1(data[:-1])


# ---------- CSV ----------
def test_csv_basic(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("1,2\n3,4\n")
    cloud = load_point_cloud(path)
    assert (cloud.n, cloud.d) == (2, 2)
    np.testing.assert_array_equal(cloud.points, [[1, 2], [3, 4]])


def test_csv_header_is_skipped(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("x,y\n1.5,-2\n3e-1,4\n")
    np.testing.assert_array_equal(read_csv_points(path), [[1.5, -2.0], [0.3, 4.0]])


@pytest.mark.parametrize("text", ["1,2\n3,4,5\n", "1,2,3\n4,5\n"])
def test_csv_ragged_rows(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ShapeError):
        load_point_cloud(path)


def test_csv_non_numeric_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3,abc\n")
    with pytest.raises(ParseError) as err:
        read_csv_points(path)
    assert "rad 2" in err.value.location


@pytest.mark.parametrize("text, row", [("1,nan\n3,4\n", 1), ("1,2\ninf,2\n", 2), ("x,y\n1,2\n-inf,0\n", 3)])
def test_csv_non_finite_cell(tmp_path, text, row):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ParseError) as err:
        read_csv_points(path)
    assert f"rad {row}" in err.value.location
    assert "oändligt" in err.value.reason


def test_csv_roundtrip_keeps_values(tmp_path, rng):
    cloud = PointCloud(rng.normal(size=(20, 9)))
    write_cloud_csv(tmp_path / "c.csv", cloud)
    np.testing.assert_array_equal(read_csv_points(tmp_path / "c.csv"), cloud.points)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_point_cloud(tmp_path / "nope.csv")


def test_unknown_suffix(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"")
    with pytest.raises(ValueError):
        load_point_cloud(path)
