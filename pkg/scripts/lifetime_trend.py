#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
lifetime_trend.py
-----------------
Max H1-livslängd för ρ(k, p) över en serie viktdumpar (t.ex. träningssnapshots),
eventuellt korrelerad mot träffsäkerhet.

- Indata: --in a.wts1 b.wts1 … eller --glob (default *.wts1 i SOURCES_DIR, sorterat på namn)
- --acc: en träffsäkerhet per snapshot (samma ordning) -> Pearson-korrelation
- Excel: DATA_DIR/data_topologi.xlsx, flik LIFETIME_trend (en rad per snapshot)
- --plot: PNG med livslängd per snapshot (matplotlib, Agg)
- SHOW_PROGRESS via --show-progress / --no-show-progress

Kör:  python scripts/lifetime_trend.py --glob "conv1_epoch*.wts1" --acc 0.21 0.25 0.28 --plot trend.png
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))
try:
    from scripts.common.paths import LEDGER_XLSX, SOURCES_DIR
except Exception:
    print("Kunde inte importera scripts/common/paths.py – säkerställ att repo-strukturen följs.", file=sys.stderr)
    raise

from scripts.common import progress
from scripts.common.ledger import append_row_xlsx
from scripts.common.progress import fail, fmt_int, log, warn
from scripts.topology.density import FiltrationParams, density_filtration
from scripts.topology.errors import TopologyError
from scripts.topology.formats import load_point_cloud
from scripts.topology.persistence import RipsParams, max_lifetime, rips_barcodes
from scripts.topology.pointcloud import MetricMode, center_normalize, drop_constant_points

SHEET_NAME = "LIFETIME_trend"
HEADER = ["Datum", "Snapshot", "Punkter", "Filtrerade", "Notation", "Max livslängd H1", "Träffsäkerhet"]

DEFAULT_K = 100
DEFAULT_P = 0.1


def snapshot_lifetime(path: Path, params: FiltrationParams, metric: MetricMode,
                      rips: RipsParams = RipsParams()) -> dict:
    cloud = load_point_cloud(path)
    loaded = cloud.n
    cloud, dropped = drop_constant_points(cloud)
    if dropped:
        warn(f"{path.name}: {fmt_int(dropped)} konstanta punkter togs bort")
    cloud = density_filtration(center_normalize(cloud), params, metric)
    barcode = rips_barcodes(cloud, metric, rips)
    return {
        "Snapshot": path.name,
        "Punkter": loaded,
        "Filtrerade": cloud.n,
        "Notation": params.notation(),
        "Max livslängd H1": max_lifetime(barcode, 1),
    }


def trend_table(paths: Sequence[Path], params: FiltrationParams, metric: MetricMode,
                accuracies: Optional[Sequence[float]] = None, rips: RipsParams = RipsParams()) -> pd.DataFrame:
    if accuracies is not None and len(accuracies) != len(paths):
        raise ValueError(f"{len(accuracies)} träffsäkerheter för {len(paths)} snapshots")
    rows = []
    for i, path in enumerate(paths):
        row = snapshot_lifetime(Path(path), params, metric, rips)
        row["Träffsäkerhet"] = None if accuracies is None else float(accuracies[i])
        log(f"{row['Snapshot']}: {fmt_int(row['Punkter'])} -> {fmt_int(row['Filtrerade'])}, "
            f"max livslängd H1 = {row['Max livslängd H1']:.6g}")
        rows.append(row)
    return pd.DataFrame(rows, columns=HEADER[1:])


def pearson(df: pd.DataFrame) -> Optional[float]:
    """Pearson mellan livslängd och träffsäkerhet; None om det inte går att räkna."""
    sub = df[["Max livslängd H1", "Träffsäkerhet"]].dropna().astype(float)
    if len(sub) < 2:
        return None
    r = sub["Max livslängd H1"].corr(sub["Träffsäkerhet"])
    return None if r is None or math.isnan(r) else float(r)


def plot_trend(df: pd.DataFrame, out: Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    x = range(len(df))
    ax.plot(x, df["Max livslängd H1"], marker="o", color="tab:red", label="Max livslängd H1")
    ax.set_xticks(list(x))
    ax.set_xticklabels(df["Snapshot"], rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("livslängd")
    if df["Träffsäkerhet"].notna().any():
        ax2 = ax.twinx()
        ax2.plot(x, df["Träffsäkerhet"], marker="s", color="tab:blue", label="Träffsäkerhet")
        ax2.set_ylabel("träffsäkerhet")
    ax.set_title(f"Livslängd per snapshot – {df['Notation'].iloc[0]}" if len(df) else "Livslängd per snapshot")
    fig.tight_layout()
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def resolve_inputs(inputs: Optional[List[Path]], pattern: str) -> List[Path]:
    if inputs:
        return list(inputs)
    return sorted(SOURCES_DIR.glob(pattern))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Max H1-livslängd per snapshot, ev. mot träffsäkerhet.")
    sp = parser.add_mutually_exclusive_group()
    sp.add_argument("--show-progress", action="store_true", help="Visa loggar under körning.")
    sp.add_argument("--no-show-progress", action="store_true", help="Dölj löpande loggar (endast sammanfattning i slutet).")
    parser.add_argument("--in", dest="inputs", type=Path, nargs="+")
    parser.add_argument("--glob", default="*.wts1", help="Mönster i SOURCES_DIR när --in saknas.")
    parser.add_argument("--acc", type=float, nargs="+", help="Träffsäkerhet per snapshot.")
    parser.add_argument("--k", type=int, default=DEFAULT_K)
    parser.add_argument("--p", type=float, default=DEFAULT_P)
    parser.add_argument("--metric", default=MetricMode.VNE_VARIANCE.value)
    parser.add_argument("--plot", type=Path, help="Spara PNG hit.")
    parser.add_argument("--ledger", type=Path, default=LEDGER_XLSX)
    parser.add_argument("--no-ledger", action="store_true")
    args = parser.parse_args(argv)

    if args.show_progress:
        progress.set_progress(True)
    if args.no_show_progress:
        progress.set_progress(False)

    paths = resolve_inputs(args.inputs, args.glob)
    if not paths:
        fail(f"Inga snapshots hittades (mönster '{args.glob}' i {SOURCES_DIR}).")
        return 2

    try:
        params = FiltrationParams(args.k, args.p)
        metric = MetricMode.parse(args.metric)
        df = trend_table(paths, params, metric, args.acc)
        if not args.no_ledger:
            for row in df.astype(object).where(df.notna(), None).to_dict(orient="records"):
                append_row_xlsx(args.ledger, SHEET_NAME, HEADER, row)
        if args.plot:
            plot_trend(df, args.plot)
            log(f"Plot sparad: {args.plot}")
    except KeyboardInterrupt:
        print("\nAvbrutet av användaren.", file=sys.stderr)
        return 130
    except (TopologyError, ValueError, OSError) as exc:
        fail(str(exc))
        return 1

    print(f"{len(df)} snapshots, {params.notation()}: max livslängd H1 "
          f"{df['Max livslängd H1'].min():.6g} – {df['Max livslängd H1'].max():.6g}")
    r = pearson(df)
    if r is not None:
        print(f"Pearson(livslängd, träffsäkerhet) = {r:.3f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
