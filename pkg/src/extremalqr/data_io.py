"""CSV ingestion and report serialization.

Input files carry one ISO-8601 date column followed by numeric series;
validation errors name the offending row and column. Report tables are
written with a stable column order and 17 significant digits so re-runs
with the same configuration are bytewise identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .errors import DataError


@dataclass
class SeriesTable:
    """Parsed time-ordered numeric series keyed by column name."""

    dates: list[str]
    columns: dict[str, np.ndarray] = field(repr=False)

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    def require(self, names) -> None:
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise DataError(f"missing columns: {', '.join(missing)}")


def ingest_csv(path, date_column: str | None = None) -> SeriesTable:
    """Parse a CSV of dated numeric series with row-level validation.

    The date column defaults to the first header. Unparseable cells,
    duplicate dates, and out-of-order dates are rejected with the row
    number (1-based, counting the header as row 1) and column name.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names in header")
        if date_column is None:
            date_column = header[0]
        if date_column not in header:
            raise DataError(f"{path}: date column {date_column!r} not in header")
        date_pos = header.index(date_column)
        value_names = [h for i, h in enumerate(header) if i != date_pos]

        dates: list[str] = []
        values: list[list[float]] = []
        seen: set[str] = set()
        prev: date | None = None
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}: row {row_no}: expected {len(header)} cells, "
                                f"got {len(row)}")
            raw_date = row[date_pos].strip()
            try:
                parsed = date.fromisoformat(raw_date)
            except ValueError:
                raise DataError(
                    f"{path}: row {row_no}, column {date_column!r}: "
                    f"not an ISO-8601 date: {raw_date!r}") from None
            if raw_date in seen:
                raise DataError(f"{path}: row {row_no}: duplicate date {raw_date}")
            if prev is not None and parsed < prev:
                raise DataError(f"{path}: row {row_no}: dates not in ascending order")
            seen.add(raw_date)
            prev = parsed
            rec = []
            for i, h in enumerate(header):
                if i == date_pos:
                    continue
                cell = row[i].strip()
                if not cell:
                    raise DataError(f"{path}: row {row_no}, column {h!r}: blank cell")
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_no}, column {h!r}: "
                        f"not numeric: {cell!r}") from None
                if not np.isfinite(v):
                    raise DataError(f"{path}: row {row_no}, column {h!r}: non-finite value")
                rec.append(v)
            dates.append(raw_date)
            values.append(rec)
    if not dates:
        raise DataError(f"{path}: no data rows")
    arr = np.asarray(values, dtype=float)
    columns = {name: arr[:, j].copy() for j, name in enumerate(value_names)}
    return SeriesTable(dates=dates, columns=columns)


def fmt(x) -> str:
    """Serialize a number with 17 significant digits (round-trip exact)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header: list[str], rows) -> None:
    """Write rows of mixed numbers/strings with deterministic formatting."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else fmt(c) for c in row])


def write_json(path, payload: dict) -> None:
    """Write a JSON document with sorted keys and stable float text."""
    path = Path(path)

    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        raise TypeError(f"not JSON serializable: {type(o)!r}")

    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=default)
        fh.write("\n")
