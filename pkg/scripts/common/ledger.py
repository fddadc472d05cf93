# scripts/common/ledger.py
"""
Excel-ledger: en rad per körning.
- Fil, flik och rubrikrad skapas om de saknas
- Nya rader läggs alltid sist
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

from openpyxl import Workbook, load_workbook

from scripts.common.progress import local_now_str


def ensure_workbook(path: Path, sheet: str, header: Sequence[str]) -> Workbook:
    if path.exists():
        wb = load_workbook(path)
    else:
        wb = Workbook()
        ws = wb.active
        ws.title = sheet
        ws.append(list(header))
    if sheet not in wb.sheetnames:
        ws = wb.create_sheet(sheet)
        ws.append(list(header))
    return wb


def append_row_xlsx(path: Path, sheet: str, header: Sequence[str], row: Mapping[str, object]) -> int:
    """Lägg till `row` (nycklar = rubriker, "Datum" fylls i automatiskt). Returnerar radnumret."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    wb = ensure_workbook(path, sheet, header)
    ws = wb[sheet]
    values = dict(row)
    values.setdefault("Datum", local_now_str())
    ws.append([values.get(col) for col in header])
    wb.save(path)
    return ws.max_row
