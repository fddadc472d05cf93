# scripts/topology/pipeline.py
"""
Hela kedjan: inläsning -> normalisering -> ρ(k, p) -> Mapper och/eller
persistens -> export.

Varje fel kapslas i PipelineError(stage, cause) där stage är en av
load | normalize | filtration | mapper | persistence | export.
Artefakterna i out_dir är byte-identiska mellan körningar med samma indata.
Ledger-raden (xlsx) hamnar utanför out_dir och omfattas inte av det.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from scripts.common.ledger import append_row_xlsx
from scripts.common.paths import LEDGER_XLSX
from scripts.common.progress import fmt_int, log, warn
from scripts.topology.density import FiltrationParams, filtration_indices
from scripts.topology.errors import EmptyCloud
from scripts.topology.export import BARCODE_FORMATS, GRAPH_FORMATS, export_barcode, export_graph
from scripts.topology.formats import load_point_cloud, write_bytes_atomic, write_cloud_csv
from scripts.topology.mapper import (
    MapperGraph,
    MapperParams,
    connected_components,
    cycle_rank,
    loop_rank,
    mapper_graph,
    pca_lens,
)
from scripts.topology.persistence import Barcode, RipsParams, dominant_intervals, max_lifetime, rips_barcodes
from scripts.topology.pointcloud import (
    DEFAULT_METRIC,
    MetricMode,
    PointCloud,
    center_normalize,
    drop_constant_points,
)

ANALYSES = ("mapper", "persistence", "both")
EXPORT_FORMATS = ("json", "dot", "svg", "csv")
STAGES = ("load", "normalize", "filtration", "mapper", "persistence", "export")
DOMINANT_RATIO = 3.0

LEDGER_SHEET = "TOPO_runs"
LEDGER_HEADER = [
    "Datum", "Indata", "Metrik", "Notation", "Inlästa", "Borttagna", "Filtrerade",
    "Noder", "Kanter", "Cykelrang", "Looprang", "Max livslängd H1", "Dominanta H1", "Utkatalog",
]


class PipelineError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        self.stage, self.cause = stage, cause
        super().__init__(f"[{stage}] {cause}")


@dataclass(frozen=True)
class PipelineConfig:
    inputs: Tuple[Path, ...]
    out_dir: Path
    fmt: Optional[str] = None
    metric: MetricMode = DEFAULT_METRIC
    filtration: Optional[FiltrationParams] = None
    analysis: str = "both"
    mapper: MapperParams = field(default_factory=MapperParams)
    rips: RipsParams = field(default_factory=RipsParams)
    formats: Tuple[str, ...] = ("json",)
    channels: Optional[Tuple[int, ...]] = None
    normalize: bool = True
    lens_before_filtration: bool = False
    ledger: Optional[Path] = LEDGER_XLSX

    def __post_init__(self) -> None:
        if isinstance(self.inputs, (str, Path)):
            object.__setattr__(self, "inputs", (self.inputs,))
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        if not self.inputs:
            raise ValueError("minst en indatafil krävs")
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        object.__setattr__(self, "metric", MetricMode.parse(self.metric))
        if self.analysis not in ANALYSES:
            raise ValueError(f"okänd analys '{self.analysis}' (välj bland: {', '.join(ANALYSES)})")
        formats = tuple(self.formats)
        for f in formats:
            if f not in EXPORT_FORMATS:
                raise ValueError(f"okänt exportformat '{f}' (välj bland: {', '.join(EXPORT_FORMATS)})")
        object.__setattr__(self, "formats", formats)
        # Mapper-klustringen använder samma metrik som resten av kedjan
        if self.mapper.metric is not self.metric:
            object.__setattr__(self, "mapper", dataclasses.replace(self.mapper, metric=self.metric))

    @property
    def runs_mapper(self) -> bool:
        return self.analysis in ("mapper", "both")

    @property
    def runs_persistence(self) -> bool:
        return self.analysis in ("persistence", "both")

    def notation(self) -> str:
        """T.ex. 'Mapper(30,3) av ρ(200,0.3)'."""
        parts = []
        if self.runs_mapper:
            parts.append(self.mapper.notation())
        if self.runs_persistence:
            parts.append("Rips")
        head = " + ".join(parts)
        if self.filtration is None:
            return head
        return f"{head} av {self.filtration.notation()}"


@dataclass
class PipelineResult:
    cloud: PointCloud
    graph: Optional[MapperGraph]
    barcode: Optional[Barcode]
    summary: Dict[str, Any]


class _Stage:
    """Kontext som kapslar fel i PipelineError med stegnamn."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self) -> "_Stage":
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc is not None and not isinstance(exc, (PipelineError, KeyboardInterrupt)):
            raise PipelineError(self.name, exc) from exc
        return False


def _write_artifacts(cfg: PipelineConfig, cloud: PointCloud, graph: Optional[MapperGraph],
                     barcode: Optional[Barcode]) -> List[str]:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    written: List[str] = []
    for f in cfg.formats:
        if graph is not None and f in GRAPH_FORMATS:
            write_bytes_atomic(out / f"graph.{f}", export_graph(graph, f))
            written.append(f"graph.{f}")
        if barcode is not None and f in BARCODE_FORMATS:
            write_bytes_atomic(out / f"barcode.{f}", export_barcode(barcode, f))
            written.append(f"barcode.{f}")
        if f == "csv":
            write_cloud_csv(out / "cloud.csv", cloud)
            written.append("cloud.csv")
    return sorted(written)


def _ledger_row(cfg: PipelineConfig, summary: Dict[str, Any]) -> Dict[str, object]:
    counts = summary["counts"]
    return {
        "Indata": ", ".join(p.name for p in cfg.inputs),
        "Metrik": cfg.metric.value,
        "Notation": summary["notation"],
        "Inlästa": counts["loaded"],
        "Borttagna": counts["dropped_constant"],
        "Filtrerade": counts["filtered"],
        "Noder": summary.get("nodes"),
        "Kanter": summary.get("edges"),
        "Cykelrang": summary.get("cycle_rank"),
        "Looprang": summary.get("loop_rank"),
        "Max livslängd H1": summary.get("max_lifetime"),
        "Dominanta H1": summary.get("dominant_dim1"),
        "Utkatalog": str(cfg.out_dir),
    }


def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    summary: Dict[str, Any] = {
        "inputs": [p.name for p in cfg.inputs],
        "metric": cfg.metric.value,
        "notation": cfg.notation(),
    }
    counts: Dict[str, int] = {}
    summary["counts"] = counts

    with _Stage("load"):
        log(f"Läser {len(cfg.inputs)} fil(er) …")
        cloud = load_point_cloud(cfg.inputs, cfg.fmt, cfg.channels)
        counts["loaded"] = cloud.n
        if cloud.n == 0:
            raise EmptyCloud()
        log(f"Inläst: {fmt_int(cloud.n)} punkter i {cloud.d} dimensioner")

    with _Stage("normalize"):
        dropped = 0
        if cfg.normalize:
            cloud, dropped = drop_constant_points(cloud)
            if dropped:
                warn(f"{fmt_int(dropped)} konstanta punkter togs bort före normalisering")
            if cloud.n == 0:
                raise EmptyCloud()
            cloud = center_normalize(cloud)
        counts["dropped_constant"] = dropped
        counts["normalized"] = cloud.n

    with _Stage("filtration"):
        full = cloud
        kept: Optional[np.ndarray] = None
        if cfg.filtration is not None:
            kept = filtration_indices(cloud, cfg.filtration, cfg.metric)
            cloud = cloud.subset(kept)
            log(f"{cfg.filtration.notation()}: {fmt_int(full.n)} -> {fmt_int(cloud.n)} punkter")
        counts["filtered"] = cloud.n

    graph: Optional[MapperGraph] = None
    if cfg.runs_mapper:
        with _Stage("mapper"):
            lens = None
            if cfg.lens_before_filtration and kept is not None and cloud.n > 1:
                lens = pca_lens(full, cfg.mapper.lens_dims)[kept]
            graph = mapper_graph(cloud, cfg.mapper, lens)
            summary["nodes"] = len(graph.nodes)
            summary["edges"] = len(graph.edges)
            summary["components"] = connected_components(graph)
            summary["cycle_rank"] = cycle_rank(graph)
            summary["loop_rank"] = loop_rank(graph)
            log(f"{cfg.mapper.notation()}: {summary['nodes']} noder, {summary['edges']} kanter, "
                f"cykelrang {summary['cycle_rank']}, looprang {summary['loop_rank']}")

    barcode: Optional[Barcode] = None
    if cfg.runs_persistence:
        with _Stage("persistence"):
            barcode = rips_barcodes(cloud, cfg.metric, cfg.rips)
            summary["max_lifetime"] = max_lifetime(barcode, 1)
            summary["dominant_dim1"] = len(dominant_intervals(barcode, 1, DOMINANT_RATIO))
            summary["infinite_dim0"] = sum(1 for _, d in barcode.dim0 if d == float("inf"))
            log(f"Rips: {len(barcode.dim0)} H0-intervall, {len(barcode.dim1)} H1-intervall, "
                f"max livslängd H1 = {summary['max_lifetime']:.6g}")

    with _Stage("export"):
        artifacts = _write_artifacts(cfg, cloud, graph, barcode)
        summary["artifacts"] = artifacts + ["summary.json"]
        payload = json.dumps(summary, indent=2, ensure_ascii=False, sort_keys=True) + "\n"
        write_bytes_atomic(cfg.out_dir / "summary.json", payload.encode("utf-8"))

    if cfg.ledger is not None:
        try:
            append_row_xlsx(Path(cfg.ledger), LEDGER_SHEET, LEDGER_HEADER, _ledger_row(cfg, summary))
        except Exception as exc:
            warn(f"Kunde inte skriva ledger {cfg.ledger}: {type(exc).__name__}: {exc}")

    return PipelineResult(cloud, graph, barcode, summary)


def stage_counts_line(summary: Dict[str, Any]) -> str:
    c = summary["counts"]
    return " -> ".join(fmt_int(c[k]) for k in ("loaded", "normalized", "filtered"))


def summary_lines(summary: Dict[str, Any]) -> Sequence[str]:
    """Slutsammanfattningen som skrivs även när SHOW_PROGRESS = False."""
    lines = [f"{summary['notation']}: punkter {stage_counts_line(summary)} "
             f"(borttagna konstanta: {fmt_int(summary['counts']['dropped_constant'])})"]
    if "cycle_rank" in summary:
        lines.append(f"Mapper: cykelrang {summary['cycle_rank']}, looprang {summary['loop_rank']} "
                     f"({summary['nodes']} noder, {summary['edges']} kanter)")
    if "max_lifetime" in summary:
        lines.append(f"Persistens: max livslängd H1 = {summary['max_lifetime']:.6g}, "
                     f"dominanta H1-intervall: {summary['dominant_dim1']}")
    return lines
