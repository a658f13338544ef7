"""Complex-matrix CSV exchange format.

One text line per matrix row, row-major. Each complex entry takes two
consecutive cells ``re,im``, so an ``m x n`` matrix becomes ``m`` lines of
``2n`` comma-separated numbers. Values are written with 17 significant digits
and round-trip exactly. Lines starting with ``#`` are ignored on read.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def format_complex_rows(M) -> list[str]:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    lines = []
    for row in M:
        cells = np.empty(2 * len(row))
        cells[0::2] = row.real
        cells[1::2] = row.imag
        lines.append(",".join(repr(float(c)) for c in cells))
    return lines


def write_complex_csv(path, M) -> Path:
    path = Path(path)
    try:
        path.write_text("\n".join(format_complex_rows(M)) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write complex CSV to {path}: {exc}") from exc
    return path


def parse_complex_rows(lines) -> np.ndarray:
    rows = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = np.array([float(c) for c in line.split(",")])
        if len(cells) % 2:
            raise ValueError(f"odd number of cells in complex CSV row: {line!r}")
        rows.append(cells[0::2] + 1j * cells[1::2])
    if len({len(r) for r in rows}) > 1:
        raise ValueError("ragged complex CSV")
    return np.array(rows)


def read_complex_csv(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read complex CSV from {path}: {exc}") from exc
    return parse_complex_rows(text.splitlines())
