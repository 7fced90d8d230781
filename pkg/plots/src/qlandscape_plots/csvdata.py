"""Reader for the qlandscape sweep CSV format.

The format is documented in the main package README: `#`-prefixed metadata
comment lines, one header row, then comma-separated data rows.  Values are
kept as raw strings so that `--dump-points` can reproduce the file content
byte for byte; numeric parsing happens only where a plot needs numbers.
"""
from __future__ import annotations

from pathlib import Path


class MissingColumnError(KeyError):
    """A requested column is not present in the CSV header."""


def read_csv(path: "str | Path") -> tuple[list[str], list[dict[str, str]]]:
    """Return (column names, rows as raw-string dicts)."""
    columns: list[str] = []
    rows: list[dict[str, str]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if not columns:
                columns = parts
                continue
            if len(parts) != len(columns):
                continue  # torn line from an interrupted run
            rows.append(dict(zip(columns, parts)))
    return columns, rows


def require_columns(columns: list[str], wanted) -> None:
    missing = [name for name in wanted if name not in columns]
    if missing:
        raise MissingColumnError(f"CSV is missing column(s): {', '.join(missing)}")
