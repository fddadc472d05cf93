# scripts/topology/export.py
"""
Export av Mapper-grafer och streckkoder: json | dot | svg | csv.

JSON är det kanoniska formatet (kompakt, flyttal med kortaste repr, null = ∞)
och kan läsas tillbaka med parse_graph_json / parse_barcode_json.
SVG ritas med matplotlib (Agg) med fast hashsalt och utan datum, så samma
indata ger samma byte.
"""
from __future__ import annotations

import io
import json
import math
from typing import Any, Dict, List, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import networkx as nx
import numpy as np
import pandas as pd
from matplotlib import colormaps
from matplotlib.colors import Normalize, to_hex
from matplotlib.figure import Figure

from scripts.topology.errors import ParseError
from scripts.topology.mapper import MapperGraph, MapperNode, as_nx_graph
from scripts.topology.persistence import INF, Barcode

GRAPH_FORMATS = ("json", "dot", "svg", "csv")
BARCODE_FORMATS = ("json", "svg", "csv")

# röd = största noden, blå = minsta
SIZE_CMAP = "coolwarm"
SVG_RC = {"svg.hashsalt": "filter-topology", "svg.fonttype": "none"}
SVG_METADATA = {"Date": None}


def _dumps(obj: Any) -> bytes:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False).encode("utf-8")


def fmt8(x: float) -> str:
    """8 decimaler utan avslutande nollor: 1.0 -> '1', √2 -> '1.41421356'."""
    if math.isinf(x):
        return "∞"
    s = f"{x:.8f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def _svg_bytes(fig: Figure) -> bytes:
    buf = io.BytesIO()
    with matplotlib.rc_context(SVG_RC):
        fig.savefig(buf, format="svg", metadata=SVG_METADATA)
    return buf.getvalue()


# ---------- Graf ----------
def graph_to_dict(graph: MapperGraph) -> Dict[str, Any]:
    return {
        "nodes": [
            {"id": n.id, "size": n.size, "members": list(n.members), "mean": list(n.mean)}
            for n in graph.nodes
        ],
        "edges": [[a, b] for a, b in graph.edges],
    }


def size_colors(graph: MapperGraph) -> List[str]:
    values = [node.color for node in graph.nodes]
    if not values:
        return []
    norm = Normalize(vmin=min(values), vmax=max(values))
    cmap = colormaps[SIZE_CMAP]
    return [to_hex(cmap(float(norm(v)))) for v in values]


def graph_dot(graph: MapperGraph) -> str:
    lines = ["graph mapper {", "  node [style=filled];"]
    for node, color in zip(graph.nodes, size_colors(graph)):
        lines.append(f'  {node.id} [label="{node.size}", fillcolor="{color}"];')
    for a, b in graph.edges:
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def circle_layout(graph: MapperGraph) -> np.ndarray:
    """Noderna jämnt på enhetscirkeln i id-ordning, en rad per nod."""
    if not graph.nodes:
        return np.zeros((0, 2))
    pos = nx.circular_layout(as_nx_graph(graph))
    return np.array([pos[node.id] for node in graph.nodes], dtype=np.float64)


def graph_svg(graph: MapperGraph) -> bytes:
    fig = Figure(figsize=(8, 8))
    ax = fig.add_subplot(1, 1, 1)
    ax.set_axis_off()
    ax.set_xlim(-1.4, 1.4)
    ax.set_ylim(-1.4, 1.4)
    ax.set_aspect("equal")
    pos = circle_layout(graph)
    for a, b in graph.edges:
        ax.plot(pos[[a, b], 0], pos[[a, b], 1], color="#888888", linewidth=0.8, zorder=1)
    if graph.nodes:
        sizes = np.asarray(graph.sizes, dtype=np.float64)
        ax.scatter(pos[:, 0], pos[:, 1], s=40.0 + 160.0 * sizes / sizes.max(),
                   c=size_colors(graph), edgecolors="black", linewidths=0.5, zorder=2)
    # 3×3-glyf för medelfiltret bredvid varje nod
    for node, (x, y) in zip(graph.nodes, pos):
        if len(node.mean) != 9:
            continue
        glyph = np.asarray(node.mean).reshape(3, 3)
        ax.imshow(glyph, cmap="gray", extent=(x + 0.06, x + 0.18, y - 0.06, y + 0.06),
                  origin="upper", interpolation="nearest", zorder=3)
    ax.set_xlim(-1.4, 1.4)
    ax.set_ylim(-1.4, 1.4)
    return _svg_bytes(fig)


def graph_csv(graph: MapperGraph) -> str:
    width = max((len(n.mean) for n in graph.nodes), default=0)
    rows = []
    for n in graph.nodes:
        row: Dict[str, Any] = {"id": n.id, "size": n.size, "members": " ".join(str(m) for m in n.members)}
        row.update({f"mean_{j}": v for j, v in enumerate(n.mean)})
        rows.append(row)
    columns = ["id", "size", "members"] + [f"mean_{j}" for j in range(width)]
    return pd.DataFrame(rows, columns=columns).to_csv(index=False, lineterminator="\n")


def export_graph(graph: MapperGraph, fmt: str = "json") -> bytes:
    if fmt == "json":
        return _dumps(graph_to_dict(graph))
    if fmt == "dot":
        return graph_dot(graph).encode("utf-8")
    if fmt == "svg":
        return graph_svg(graph)
    if fmt == "csv":
        return graph_csv(graph).encode("utf-8")
    raise ValueError(f"okänt grafformat '{fmt}' (välj bland: {', '.join(GRAPH_FORMATS)})")


def parse_graph_json(data: bytes | str) -> MapperGraph:
    try:
        obj = json.loads(data)
        nodes = tuple(
            MapperNode(int(n["id"]), tuple(int(m) for m in n["members"]), tuple(float(v) for v in n["mean"]))
            for n in obj["nodes"]
        )
        edges = tuple((int(a), int(b)) for a, b in obj["edges"])
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError("graf-JSON", str(exc)) from None
    for i, node in enumerate(nodes):
        if node.id != i:
            raise ParseError("graf-JSON", f"nod-id {node.id} på plats {i}")
    return MapperGraph(nodes, edges)


# ---------- Streckkod ----------
def _death(d: float) -> float | None:
    return None if math.isinf(d) else d


def barcode_to_dict(barcode: Barcode) -> Dict[str, Any]:
    return {
        f"dim{dim}": [[b, _death(d)] for b, d in barcode.intervals(dim)]
        for dim in (0, 1)
    }


def _longest_first(ivs: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    return sorted(ivs, key=lambda iv: (-(iv[1] - iv[0]), iv[0]))


def barcode_svg(barcode: Barcode) -> bytes:
    finite = [d for dim in (0, 1) for _, d in barcode.intervals(dim) if not math.isinf(d)]
    right = 1.1 * max(finite) if finite and max(finite) > 0 else 1.0
    fig = Figure(figsize=(8, 6))
    axes = fig.subplots(2, 1, sharex=True)
    for dim, ax in zip((0, 1), axes):
        ivs = _longest_first(barcode.intervals(dim))
        for row, (b, d) in enumerate(ivs):
            end = right if math.isinf(d) else d
            ax.hlines(row, b, end, color="tab:blue" if dim == 0 else "tab:red", linewidth=2.0)
            ax.text(end, row, f" [{fmt8(b)}, {fmt8(d)}]", va="center", fontsize=6)
        ax.set_ylabel(f"H{dim}")
        ax.set_yticks([])
        ax.set_ylim(-1, max(len(ivs), 1))
        ax.invert_yaxis()
    axes[-1].set_xlim(0.0, right * 1.25)
    axes[-1].set_xlabel("skala")
    return _svg_bytes(fig)


def barcode_csv(barcode: Barcode) -> str:
    rows = [
        {"dim": dim, "birth": b, "death": _death(d)}
        for dim in (0, 1) for b, d in barcode.intervals(dim)
    ]
    df = pd.DataFrame(rows, columns=["dim", "birth", "death"])
    return df.to_csv(index=False, lineterminator="\n", na_rep="")


def export_barcode(barcode: Barcode, fmt: str = "json") -> bytes:
    if fmt == "json":
        return _dumps(barcode_to_dict(barcode))
    if fmt == "svg":
        return barcode_svg(barcode)
    if fmt == "csv":
        return barcode_csv(barcode).encode("utf-8")
    raise ValueError(f"okänt streckkodsformat '{fmt}' (välj bland: {', '.join(BARCODE_FORMATS)})")


def parse_barcode_json(data: bytes | str) -> Barcode:
    try:
        obj = json.loads(data)
        dims = [
            tuple((float(b), INF if d is None else float(d)) for b, d in obj[f"dim{k}"])
            for k in (0, 1)
        ]
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError("streckkods-JSON", str(exc)) from None
    return Barcode(dims[0], dims[1])
