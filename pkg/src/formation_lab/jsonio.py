"""JSON helpers: complex scalars travel as {"re": ..., "im": ...} records."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


def complex_to_json(value) -> dict:
    c = complex(value)
    return {"re": c.real, "im": c.imag}


def complex_from_json(obj, where: str = "value") -> complex:
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, dict) and set(obj) <= {"re", "im"}:
        try:
            return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: malformed complex record {obj!r}") from exc
    raise ConfigError(f"{where}: expected a number or a {{re, im}} record, got {obj!r}")


def vector_to_json(vec) -> list[dict]:
    return [complex_to_json(v) for v in np.asarray(vec, dtype=complex).reshape(-1)]


def vector_from_json(items, where: str = "vector") -> np.ndarray:
    if not isinstance(items, (list, tuple)):
        raise ConfigError(f"{where}: expected a list of complex records")
    return np.array([complex_from_json(v, where) for v in items], dtype=complex)


def matrix_from_json(rows, where: str = "matrix") -> np.ndarray:
    if not isinstance(rows, (list, tuple)) or not rows:
        raise ConfigError(f"{where}: expected a non-empty list of rows")
    parsed = [vector_from_json(row, where) for row in rows]
    width = len(parsed[0])
    if any(len(row) != width for row in parsed):
        raise ConfigError(f"{where}: ragged rows")
    return np.array(parsed, dtype=complex)
