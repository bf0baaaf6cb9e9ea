"""
CSV export of metric records and sparsification curves.
"""
import csv
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from src.photometrics.models import SparsificationResult

CURVE_COLUMNS = ("fraction", "sparsification", "oracle", "random")


def write_csv(path, rows: Iterable[Mapping], columns: Sequence[str] | None = None) -> Path:
    """Header row plus one record per row, '.' decimals, LF line endings."""
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n", extrasaction="raise")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(value) for key, value in row.items()})
    return path


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_curves(path, result: SparsificationResult) -> Path:
    return write_csv(path, result.rows(), CURVE_COLUMNS)


def read_csv(path) -> list[dict[str, str]]:
    with Path(path).open(encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))
