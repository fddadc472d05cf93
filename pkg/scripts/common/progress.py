# scripts/common/progress.py
from __future__ import annotations

import sys
from datetime import datetime
from zoneinfo import ZoneInfo

TZ = ZoneInfo("Europe/Stockholm")

SHOW_PROGRESS: bool = True  # kan överstyras via CLI


def set_progress(flag: bool) -> None:
    global SHOW_PROGRESS
    SHOW_PROGRESS = bool(flag)


def local_now_str() -> str:
    return datetime.now(TZ).strftime("%Y-%m-%d %H:%M")


def log(msg: str) -> None:
    if SHOW_PROGRESS:
        print(f"[{local_now_str()}] {msg}")


def warn(msg: str) -> None:
    # varningar syns även när SHOW_PROGRESS = False
    print(f"⚠️ {msg}", file=sys.stderr)


def fail(msg: str) -> None:
    print(f"[FEL] {msg}", file=sys.stderr)


def fmt_int(num: int) -> str:
    """Tusentalsavgränsare med mellanslag: 23 000 540."""
    return f"{int(num):,}".replace(",", " ")
