"""Byte-stable file formats: flat config, complex-matrix JSON, CSV tables."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines with dotted keys; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config(path: str | Path) -> dict[str, str]:
    return parse_config(Path(path).read_text())


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite number {x}")
    if x == 0.0:
        return "0.0"
    return f"{x:.17g}"


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with every float printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(dumps(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_json(path: Path, obj: Any) -> None:
    path.write_text(dumps(obj) + "\n", encoding="utf-8")


def matrix_to_obj(m: np.ndarray, **extra: Any) -> dict[str, Any]:
    m = np.asarray(m, dtype=complex)
    obj: dict[str, Any] = {"dim": int(m.shape[0]), "re": m.real.ravel().tolist(), "im": m.imag.ravel().tolist()}
    obj.update(extra)
    return obj


def matrix_from_obj(obj: Mapping[str, Any]) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed complex-matrix object: {exc}") from exc
    if re.shape != (dim * dim,) or im.shape != (dim * dim,):
        raise ConfigError(f"complex-matrix object needs {dim * dim} re and im entries")
    return (re + 1j * im).reshape(dim, dim)


def write_matrix(path: Path, m: np.ndarray, **extra: Any) -> None:
    write_json(path, matrix_to_obj(m, **extra))


def read_matrix(path: str | Path) -> np.ndarray:
    return matrix_from_obj(json.loads(Path(path).read_text()))


def write_csv(path: Path, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def barchart_rows(m: np.ndarray) -> list[tuple[int, int, float, float]]:
    """``(i, j, Re rho_ij, Im rho_ij)`` for every element, row-major."""
    d = m.shape[0]
    return [(i, j, float(m[i, j].real), float(m[i, j].imag)) for i in range(d) for j in range(d)]
