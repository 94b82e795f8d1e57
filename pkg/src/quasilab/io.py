"""CSV, JSON and flat key=value config helpers.

CSV files have a header row, comma separators, LF line endings and floats
written with 17 significant digits, which round-trips binary64 exactly.
JSON is UTF-8 with sorted keys; non-finite floats are written as the
strings "inf", "-inf" and "nan".
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import RadialGrid, RadialProfile
from .errors import InvalidInput

__all__ = ["format_float", "profile_to_csv", "write_profile", "read_profile",
           "rows_to_csv", "write_rows", "to_json", "write_json", "read_json",
           "read_config", "ConfigError"]


class ConfigError(InvalidInput):
    """Malformed or unknown entry in a config file."""


def format_float(x: float) -> str:
    return "%.17g" % x


def _table(header: Sequence[str], columns: Sequence[Sequence[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in zip(*columns):
        writer.writerow([format_float(float(v)) for v in row])
    return buf.getvalue()


def profile_to_csv(profile: RadialProfile, column: str = None) -> str:
    return _table(["r", column or profile.name], [profile.grid.nodes, profile.values])


def write_profile(path, profile: RadialProfile, column: str = None) -> None:
    Path(path).write_text(profile_to_csv(profile, column), encoding="utf-8", newline="")


def read_profile(path, name: str = None) -> RadialProfile:
    """Load a two-column r,value CSV written by :func:`write_profile`."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3 or len(rows[0]) < 2:
        raise InvalidInput(f"{path}: expected a header and at least two data rows")
    try:
        data = np.array([[float(a), float(b)] for a, b, *_ in rows[1:]])
    except ValueError as exc:
        raise InvalidInput(f"{path}: {exc}") from None
    return RadialProfile(RadialGrid(data[:, 0], layout=f"file:{path.name}"), data[:, 1],
                         name=name or rows[0][1])


def rows_to_csv(rows: Sequence[Mapping], columns: Sequence[str]) -> str:
    return _table(list(columns), [[row[c] for row in rows] for c in columns])


def write_rows(path, rows: Sequence[Mapping], columns: Sequence[str]) -> None:
    Path(path).write_text(rows_to_csv(rows, columns), encoding="utf-8", newline="")


def _clean(obj):
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Mapping):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(to_json(obj), encoding="utf-8", newline="")


def _restore(obj):
    if isinstance(obj, str) and obj in ("inf", "-inf", "nan"):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    return obj


def read_json(path):
    return _restore(json.loads(Path(path).read_text(encoding="utf-8")))


def read_config(path, allowed: Iterable[str]) -> dict:
    """Parse ``key = value`` lines with dotted keys; ``#`` starts a comment.

    Keys outside ``allowed`` raise ConfigError naming the line.
    """
    allowed = set(allowed)
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
        if key not in allowed:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out
