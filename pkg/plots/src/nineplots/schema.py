"""CSV reading against the documented column schemas."""
from __future__ import annotations

import numpy as np


class SchemaError(Exception):
    """Input file does not match the expected CSV schema; the message names
    the offending columns or rows."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def read_columns(path, required: list[str]) -> dict[str, np.ndarray]:
    """Read a headered CSV and return the required columns by name.

    Missing columns raise SchemaError naming each absent column; malformed
    numeric content raises SchemaError with the line number.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise SchemaError(path, str(e)) from None
    if not lines:
        raise SchemaError(path, "empty file")
    header = lines[0].split(",")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(path, f"missing columns: {', '.join(missing)}")
    idx = [header.index(c) for c in required]
    data = np.empty((len(lines) - 1, len(required)))
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise SchemaError(
                path, f"line {i}: expected {len(header)} fields, "
                      f"got {len(parts)}")
        try:
            data[i - 2] = [float(parts[j]) for j in idx]
        except ValueError as e:
            raise SchemaError(path, f"line {i}: {e}") from None
    return {name: data[:, k] for k, name in enumerate(required)}
