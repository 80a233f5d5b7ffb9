"""CSV ingestion and the bundled example datasets."""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Input data cannot be parsed or is inconsistent."""


def read_csv(path) -> dict[str, np.ndarray]:
    """Numeric CSV with a header row, as ``{column: float array}``.

    Errors name the offending line.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    return parse_csv(text, str(path))


def parse_csv(text: str, source: str = "<string>") -> dict[str, np.ndarray]:
    reader = csv.reader(text.splitlines())
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{source}: empty file") from None
    if not all(header) or len(set(header)) != len(header):
        raise DataError(f"{source}:1: header needs unique non-empty column names")
    cols: list[list[float]] = [[] for _ in header]
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{source}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for j, cell in enumerate(row):
            try:
                cols[j].append(float(cell))
            except ValueError:
                raise DataError(f"{source}:{lineno}: column {header[j]!r} has non-numeric value {cell.strip()!r}") from None
    if not cols[0]:
        raise DataError(f"{source}: no data rows")
    out = {h: np.array(c) for h, c in zip(header, cols)}
    for h, v in out.items():
        if not np.all(np.isfinite(v)):
            raise DataError(f"{source}: column {h!r} has non-finite values")
    return out


def to_radians(values, units: str) -> np.ndarray:
    """Angles in ``units`` (``"rad"`` or ``"deg"``) reduced to ``[0, 2pi)``."""
    values = np.asarray(values, dtype=float)
    if units == "deg":
        values = np.deg2rad(values)
    elif units != "rad":
        raise ValueError(f"units must be 'rad' or 'deg', got {units!r}")
    return np.mod(values, 2.0 * np.pi)


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled CSV (``"periwinkle"`` or ``"wind"``)."""
    ref = resources.files("nntsreg") / "data" / f"{name}.csv"
    if not ref.is_file():
        raise DataError(f"no bundled dataset named {name!r}")
    return Path(str(ref))


def load_periwinkle() -> dict[str, np.ndarray]:
    """31 periwinkles: ``distance`` (cm), ``direction`` (radians), ``day``."""
    d = read_csv(fixture_path("periwinkle"))
    d["direction"] = to_radians(d["direction"], "deg")
    return d


def load_wind() -> np.ndarray:
    """72 hourly wind directions in radians."""
    return to_radians(read_csv(fixture_path("wind"))["direction"], "deg")
