"""CSV ingestion and export of observation matrices."""
from __future__ import annotations

import csv
import math
import os

import numpy as np

from ..errors import DataError
from ..sample import Sample


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def ingest_csv(path) -> Sample:
    """Read a comma-separated numeric matrix, one observation per row.

    A first row that contains any non-numeric field is taken as a header.
    Ragged rows and non-finite values are rejected with their location.
    """
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    except OSError as err:
        raise DataError(f"cannot read {path}: {err.strerror or err}") from err
    if rows and not all(_is_number(cell) for cell in rows[0]):
        header_offset = 2
        rows = rows[1:]
    else:
        header_offset = 1
    if not rows:
        raise DataError(f"{path}: no data rows")
    width = len(rows[0])
    values = np.empty((len(rows), width))
    for r, row in enumerate(rows):
        line = r + header_offset
        if len(row) != width:
            raise DataError(f"{path}: line {line} has {len(row)} fields, expected {width}")
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: line {line}, column {c + 1}: {cell.strip()!r} is not a number") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: line {line}, column {c + 1}: non-finite value {cell.strip()!r}")
            values[r, c] = v
    if len(values) < 2:
        raise DataError(f"{path}: need at least 2 observations, found {len(values)}")
    return Sample(values)


def write_csv(path, data) -> None:
    """Write rows with 17 significant digits, enough for an exact float64 round trip."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in data:
            writer.writerow([f"{v:.17g}" for v in row])
    os.replace(tmp, path)
