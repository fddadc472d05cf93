# scripts/common/paths.py
from pathlib import Path

# repo-roten (…/scripts/common -> …/scripts -> …/root)
ROOT = Path(__file__).resolve().parents[2]

DATA_DIR = ROOT / "data"        # resultat, ledger (xlsx)
SOURCES_DIR = ROOT / "sources"  # vikt-dumpar (WTS1) och bilder (IMG1)

RESULTS_DIR = DATA_DIR / "results"
LEDGER_XLSX = DATA_DIR / "data_topologi.xlsx"

DATA_DIR.mkdir(exist_ok=True)
SOURCES_DIR.mkdir(exist_ok=True)
