from __future__ import annotations

import json

import numpy as np
import pytest
from openpyxl import load_workbook

from scripts.topology.density import FiltrationParams
from scripts.topology.filterbank import primary_circle_bank
from scripts.topology.formats import write_cloud_csv, write_wts1
from scripts.topology.mapper import MapperParams
from scripts.topology.pipeline import (
    LEDGER_HEADER,
    LEDGER_SHEET,
    PipelineConfig,
    PipelineError,
    run_pipeline,
    stage_counts_line,
    summary_lines,
)
from scripts.topology.pointcloud import PointCloud, WeightTensor
from scripts.topology.synth import ShapeSpec, sample

CIRCLE_MAPPER = MapperParams(10, 2, "euclidean", lens_dims=1, slc_bins=3)


@pytest.fixture
def circle_csv(tmp_path):
    path = tmp_path / "circle.csv"
    write_cloud_csv(path, sample(ShapeSpec("circle2d", 200)))
    return path


def test_circle_end_to_end(tmp_path, circle_csv):
    cfg = PipelineConfig(circle_csv, tmp_path / "out", metric="euclidean", mapper=CIRCLE_MAPPER,
                         normalize=False, formats=("json", "dot"), ledger=None)
    result = run_pipeline(cfg)
    s = result.summary
    assert s["counts"] == {"loaded": 200, "dropped_constant": 0, "normalized": 200, "filtered": 200}
    assert s["components"] == 1
    assert s["cycle_rank"] == 1
    assert s["dominant_dim1"] == 1
    assert s["infinite_dim0"] == 1
    assert s["artifacts"] == ["barcode.json", "graph.dot", "graph.json", "summary.json"]
    for name in s["artifacts"]:
        assert (tmp_path / "out" / name).exists()
    on_disk = json.loads((tmp_path / "out" / "summary.json").read_text(encoding="utf-8"))
    assert on_disk["cycle_rank"] == 1
    assert on_disk["notation"] == "Mapper(10,2) + Rips"


def test_noisy_circles_end_to_end(tmp_path):
    hits = 0
    for seed in range(5):
        path = tmp_path / f"noisy{seed}.csv"
        write_cloud_csv(path, sample(ShapeSpec("circle2d", 200, 0.02, seed)))
        cfg = PipelineConfig(path, tmp_path / f"out{seed}", metric="euclidean", mapper=CIRCLE_MAPPER,
                             normalize=False, ledger=None)
        s = run_pipeline(cfg).summary
        assert s["dominant_dim1"] == 1, seed
        hits += s["cycle_rank"] == 1
    assert hits >= 4


def test_weight_files_are_filtered(tmp_path):
    rng = np.random.default_rng(7)
    paths = []
    for i in range(100):
        path = tmp_path / "w" / f"step{i:03d}.wts1"
        path.parent.mkdir(exist_ok=True)
        write_wts1(path, WeightTensor(3, 3, 1, 64, rng.normal(size=9 * 64)))
        paths.append(path)
    cfg = PipelineConfig(paths, tmp_path / "out", filtration=FiltrationParams(200, 0.3),
                         analysis="mapper", mapper=MapperParams(10, 2), ledger=None)
    result = run_pipeline(cfg)
    assert stage_counts_line(result.summary) == "6 400 -> 6 400 -> 1 920"
    assert result.cloud.n == 1920
    assert result.barcode is None
    assert result.summary["notation"] == "Mapper(10,2) av ρ(200,0.3)"
    covered = set().union(*(n.members for n in result.graph.nodes))
    assert covered == set(range(1920))


def test_constant_points_are_dropped(tmp_path):
    pts = np.vstack([np.ones((3, 9)), np.random.default_rng(0).normal(size=(20, 9))])
    path = tmp_path / "mixed.csv"
    write_cloud_csv(path, PointCloud(pts))
    result = run_pipeline(PipelineConfig(path, tmp_path / "out", analysis="persistence", ledger=None))
    assert result.summary["counts"]["dropped_constant"] == 3
    assert result.summary["counts"]["normalized"] == 20
    assert "konstanta: 3" in summary_lines(result.summary)[0]


def test_missing_input_fails_in_load(tmp_path):
    cfg = PipelineConfig(tmp_path / "saknas.wts1", tmp_path / "out", ledger=None)
    with pytest.raises(PipelineError) as err:
        run_pipeline(cfg)
    assert err.value.stage == "load"
    assert isinstance(err.value.cause, FileNotFoundError)
    assert not (tmp_path / "out").exists()


def test_filtration_larger_than_cloud_fails(tmp_path, circle_csv):
    cfg = PipelineConfig(circle_csv, tmp_path / "out", filtration=FiltrationParams(500, 0.5), ledger=None)
    with pytest.raises(PipelineError) as err:
        run_pipeline(cfg)
    assert err.value.stage == "filtration"


def test_primary_circle_bank_through_pipeline(tmp_path):
    path = tmp_path / "primary.wts1"
    write_wts1(path, primary_circle_bank(64).as_weight_tensor())
    cfg = PipelineConfig(path, tmp_path / "out", metric="euclidean", ledger=None)
    s = run_pipeline(cfg).summary
    assert s["components"] == 1
    assert s["loop_rank"] == 1
    assert s["dominant_dim1"] == 1


def test_lens_before_filtration(tmp_path):
    path = tmp_path / "c.csv"
    write_cloud_csv(path, sample(ShapeSpec("circle2d", 300, 0.05, 4)))
    base = dict(metric="euclidean", filtration=FiltrationParams(10, 0.5), analysis="mapper",
                mapper=CIRCLE_MAPPER, normalize=False, ledger=None)
    late = run_pipeline(PipelineConfig(path, tmp_path / "a", **base))
    early = run_pipeline(PipelineConfig(path, tmp_path / "b", lens_before_filtration=True, **base))
    assert late.summary["counts"] == early.summary["counts"]
    assert late.cloud.n == early.cloud.n == 150
    np.testing.assert_array_equal(late.cloud.points, early.cloud.points)


def test_mapper_metric_follows_config(tmp_path, circle_csv):
    cfg = PipelineConfig(circle_csv, tmp_path / "out", metric="vne_stddev", ledger=None)
    assert cfg.mapper.metric.value == "vne_stddev"


def test_artifacts_are_reproducible(tmp_path, circle_csv):
    formats = ("json", "dot", "csv")
    for out in ("a", "b"):
        run_pipeline(PipelineConfig(circle_csv, tmp_path / out, metric="euclidean", mapper=CIRCLE_MAPPER,
                                    formats=formats, ledger=None))
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "cloud.csv" in names and "barcode.csv" in names
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_ledger_row(tmp_path, circle_csv):
    ledger = tmp_path / "ledger" / "runs.xlsx"
    cfg = PipelineConfig(circle_csv, tmp_path / "out", metric="euclidean", mapper=CIRCLE_MAPPER,
                         analysis="mapper", ledger=ledger)
    run_pipeline(cfg)
    run_pipeline(cfg)
    ws = load_workbook(ledger)[LEDGER_SHEET]
    rows = list(ws.iter_rows(values_only=True))
    assert list(rows[0]) == LEDGER_HEADER
    assert len(rows) == 3
    row = dict(zip(LEDGER_HEADER, rows[1]))
    assert row["Indata"] == "circle.csv"
    assert row["Inlästa"] == 200
    assert row["Max livslängd H1"] is None


@pytest.mark.parametrize("kwargs", [{"analysis": "homology"}, {"formats": ("png",)}, {"inputs": ()}])
def test_config_validation(tmp_path, kwargs):
    args = {"inputs": (tmp_path / "x.csv",), "out_dir": tmp_path, **kwargs}
    with pytest.raises(ValueError):
        PipelineConfig(**args)


def test_broken_ledger_only_warns(tmp_path, circle_csv, capsys):
    ledger = tmp_path / "runs.xlsx"
    ledger.write_bytes(b"not a zip")
    cfg = PipelineConfig(circle_csv, tmp_path / "out", metric="euclidean", mapper=CIRCLE_MAPPER,
                         analysis="mapper", ledger=ledger)
    result = run_pipeline(cfg)
    assert result.summary["components"] == 1
    assert (tmp_path / "out" / "summary.json").exists()
    assert "Kunde inte skriva ledger" in capsys.readouterr().err
    assert ledger.read_bytes() == b"not a zip"
