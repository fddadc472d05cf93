#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
filter_topology.py
------------------
Topologisk analys av spatiala filter i faltningslager (CNN).

Underkommandon:
  synth       syntetiskt punktmoln -> CSV
  extract     WTS1-viktdump(ar) -> CSV med spatiala filter (w·h-dimensionella punkter)
  analyze     punktmoln -> [ρ(k, p)] -> Mapper och/eller Rips-persistens -> json/dot/svg/csv
  filterbank  idealiserad 3×3-bank (primary_circle | klein_bottle | three_circle | gaussian) -> WTS1
  preprocess  IMG1-bild + WTS1-bank -> IMG1 med filtersvar som extra kanaler

- Loggar: [YYYY-MM-DD HH:MM] (Europe/Stockholm), styrs av --show-progress / --no-show-progress
- Talformat: mellanslag som tusentalsavgränsare
- Paths från scripts/common/paths.py (DATA_DIR, SOURCES_DIR, RESULTS_DIR)
- analyze lägger en rad i DATA_DIR/data_topologi.xlsx (flik TOPO_runs) om inte --no-ledger
- Exit-koder: 0 ok, 1 fel i data/körning, 2 felaktiga argument, 130 avbrutet

Kör:  python scripts/filter_topology.py analyze --in sources/conv1.wts1 --k 200 --p 0.3
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))
try:
    from scripts.common.paths import LEDGER_XLSX, RESULTS_DIR
except Exception:
    print("Kunde inte importera scripts/common/paths.py – säkerställ att repo-strukturen följs.", file=sys.stderr)
    raise

from scripts.common import progress
from scripts.common.progress import fail, fmt_int, log, warn
from scripts.topology.density import FiltrationParams
from scripts.topology.errors import TopologyError
from scripts.topology.filterbank import KINDS, append_filter_features, bank_from_tensor, make_bank, to_grayscale
from scripts.topology.formats import (
    FORMATS,
    load_point_cloud,
    read_img1,
    read_wts1,
    write_cloud_csv,
    write_img1,
    write_wts1,
)
from scripts.topology.mapper import MapperParams
from scripts.topology.persistence import EDGE_CAP, RipsParams
from scripts.topology.pipeline import (
    ANALYSES,
    EXPORT_FORMATS,
    PipelineConfig,
    PipelineError,
    run_pipeline,
    summary_lines,
)
from scripts.topology.pointcloud import MetricMode
from scripts.topology.synth import SHAPES, ShapeSpec, sample


# ---------- Hjälpare ----------
def _formats(text: str) -> List[str]:
    out = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in out if f not in EXPORT_FORMATS]
    if bad:
        raise argparse.ArgumentTypeError(f"okänt format {bad} (välj bland: {', '.join(EXPORT_FORMATS)})")
    return out


def _maxscale(text: str):
    if text == "diameter":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("maxscale måste vara 'diameter' eller ett tal > 0") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("maxscale måste vara > 0")
    return value


def _metric(text: str) -> MetricMode:
    try:
        return MetricMode.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# ---------- Underkommandon ----------
def cmd_synth(args: argparse.Namespace) -> int:
    spec = ShapeSpec(args.shape, args.n, args.noise, args.seed, args.dim, args.sigma)
    cloud = sample(spec)
    write_cloud_csv(args.out, cloud)
    log(f"{spec.shape}: {fmt_int(cloud.n)} punkter i {cloud.d} dimensioner -> {args.out}")
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    cloud = load_point_cloud(args.inputs, "wts1", args.channel)
    write_cloud_csv(args.out, cloud)
    log(f"Extraherade {fmt_int(cloud.n)} spatiala filter ({cloud.d} dim) ur {len(args.inputs)} fil(er) -> {args.out}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    filtration = FiltrationParams(args.k, args.p) if args.k is not None else None
    cfg = PipelineConfig(
        inputs=tuple(args.inputs),
        out_dir=args.out_dir,
        fmt=args.format,
        metric=args.metric,
        filtration=filtration,
        analysis=args.mode,
        mapper=MapperParams(args.resolution, args.gain, args.metric, args.lens_dims, args.slc_bins),
        rips=RipsParams(args.maxdim, args.maxscale, args.edge_cap),
        formats=tuple(args.formats),
        channels=tuple(args.channel) if args.channel else None,
        normalize=not args.no_normalize,
        lens_before_filtration=args.lens_first,
        ledger=None if args.no_ledger else args.ledger,
    )
    result = run_pipeline(cfg)
    for line in summary_lines(result.summary):
        print(line)
    log(f"Artefakter i {cfg.out_dir}: {', '.join(result.summary['artifacts'])}")
    return 0


def cmd_filterbank(args: argparse.Namespace) -> int:
    bank = make_bank(args.kind, args.n, args.seed, args.n_theta, args.n_phi)
    if bank.dedup_count:
        warn(f"{bank.dedup_count} dubblettfilter togs bort")
    write_wts1(args.out, bank.as_weight_tensor())
    log(f"{bank.kind}: {fmt_int(bank.n)} filter -> {args.out}")
    return 0


def cmd_preprocess(args: argparse.Namespace) -> int:
    image = read_img1(args.image)
    if args.grayscale:
        image = to_grayscale(image)
    bank = bank_from_tensor(read_wts1(args.bank))
    out = append_filter_features(image, bank)
    write_img1(args.out, out)
    log(f"{image.height}×{image.width}×{image.channels} -> {out.height}×{out.width}×{out.channels} -> {args.out}")
    return 0


# ---------- Parser ----------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Topologisk analys av spatiala filter i faltningslager.")
    sp = parser.add_mutually_exclusive_group()
    sp.add_argument("--show-progress", action="store_true", help="Visa loggar under körning.")
    sp.add_argument("--no-show-progress", action="store_true", help="Dölj löpande loggar (endast sammanfattning i slutet).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Syntetiskt punktmoln till CSV.")
    p.add_argument("--shape", choices=SHAPES, default="circle2d")
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=2, help="Dimension för gaussian_blob.")
    p.add_argument("--sigma", type=float, default=1.0, help="Standardavvikelse för gaussian_blob.")
    p.add_argument("--out", type=Path, default=Path("cloud.csv"))
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="WTS1-viktdump(ar) till CSV med spatiala filter.")
    p.add_argument("--in", dest="inputs", type=Path, nargs="+", required=True)
    p.add_argument("--channel", type=int, nargs="+", help="Endast dessa indatakanaler.")
    p.add_argument("--out", type=Path, default=Path("filters.csv"))
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="Mapper och/eller persistens på ett punktmoln.")
    p.add_argument("--in", dest="inputs", type=Path, nargs="+", required=True)
    p.add_argument("--format", choices=FORMATS, help="Indataformat (annars från filändelsen).")
    p.add_argument("--channel", type=int, nargs="+", help="Endast dessa indatakanaler (wts1).")
    p.add_argument("--metric", type=_metric, default=MetricMode.VNE_VARIANCE)
    p.add_argument("--k", type=int, help="k i ρ(k, p); kräver --p.")
    p.add_argument("--p", type=float, help="p i ρ(k, p); kräver --k.")
    p.add_argument("--mode", choices=ANALYSES, default="both")
    p.add_argument("--resolution", type=int, default=30)
    p.add_argument("--gain", type=float, default=3.0)
    p.add_argument("--lens-dims", type=int, choices=(1, 2), default=2)
    p.add_argument("--slc-bins", type=int, default=10)
    p.add_argument("--lens-first", action="store_true", help="PCA-lins på molnet före densitetsfiltrering.")
    p.add_argument("--maxscale", type=_maxscale, default="diameter")
    p.add_argument("--maxdim", type=int, choices=(0, 1), default=1)
    p.add_argument("--edge-cap", type=int, default=EDGE_CAP)
    p.add_argument("--no-normalize", action="store_true", help="Hoppa över centrering/normering (t.ex. 2D-moln).")
    p.add_argument("--out-dir", type=Path, default=RESULTS_DIR)
    p.add_argument("--formats", type=_formats, default=["json", "dot", "svg"])
    p.add_argument("--ledger", type=Path, default=LEDGER_XLSX)
    p.add_argument("--no-ledger", action="store_true", help="Skriv ingen rad till xlsx-ledgern.")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("filterbank", help="Idealiserad 3×3-filterbank till WTS1.")
    p.add_argument("--kind", choices=KINDS, default="primary_circle")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-theta", type=int, help="Antal θ (klein_bottle/three_circle).")
    p.add_argument("--n-phi", type=int, help="Antal φ (klein_bottle/three_circle).")
    p.add_argument("--out", type=Path, default=Path("bank.wts1"))
    p.set_defaults(func=cmd_filterbank)

    p = sub.add_parser("preprocess", help="Lägg filtersvar som extra kanaler i en IMG1-bild.")
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--bank", type=Path, required=True)
    p.add_argument("--grayscale", action="store_true", help="Konvertera RGB till gråskala först.")
    p.add_argument("--out", type=Path, default=Path("augmented.img1"))
    p.set_defaults(func=cmd_preprocess)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.show_progress:
        progress.set_progress(True)
    if args.no_show_progress:
        progress.set_progress(False)

    if args.command == "analyze" and (args.k is None) != (args.p is None):
        parser.error("--k och --p måste anges tillsammans")

    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("\nAvbrutet av användaren.", file=sys.stderr)
        return 130
    except PipelineError as exc:
        fail(f"Steg '{exc.stage}': {exc.cause}")
        return 1
    except (TopologyError, ValueError, OSError) as exc:
        fail(str(exc))
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
