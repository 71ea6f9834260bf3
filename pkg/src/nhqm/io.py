"""Serialization: matrix JSON schema, metadata CSV, and run configs.

Matrices travel as ``{"dim": n, "entries": [[re, im], ...]}`` with the
entries flattened row-major.  CSV files are UTF-8, comma separated,
with ``#``-prefixed metadata lines and floats printed to 17 significant
digits so that identical runs produce identical bytes.

Run configurations are plain ``key = value`` text files; values are
parsed as int, float, complex, booleans, or comma lists thereof.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "format_float",
    "write_csv",
    "parse_config",
    "apply_overrides",
]


def matrix_to_json(M) -> str:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("only square matrices serialize to this schema")
    entries = [[float(v.real), float(v.imag)] for v in M.ravel(order="C")]
    return json.dumps({"dim": M.shape[0], "entries": entries})


def matrix_from_json(text: str) -> np.ndarray:
    data = json.loads(text)
    n = int(data["dim"])
    entries = data["entries"]
    if len(entries) != n * n:
        raise ValueError("entry count does not match dim^2")
    flat = np.array([complex(re, im) for re, im in entries])
    return flat.reshape(n, n)


def format_float(x) -> str:
    """17-significant-digit decimal rendering, stable across runs."""
    return f"{float(x):.17g}"


def _render(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, complex):
        return f"{format_float(value.real)}{value.imag:+.17g}j"
    return str(value)


def write_csv(path, columns, rows, metadata=None):
    """Write rows (dicts or sequences) with a # metadata header."""
    path = Path(path)
    lines = []
    for key, value in (metadata or {}).items():
        lines.append(f"# {key}={_render(value)}")
    lines.append(",".join(columns))
    for row in rows:
        if isinstance(row, dict):
            cells = [_render(row[c]) for c in columns]
        else:
            cells = [_render(v) for v in row]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _parse_scalar(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for caster in (int, float, complex):
        try:
            return caster(text)
        except ValueError:
            continue
    return text


def parse_config(path) -> dict:
    """Read a key = value config file; '#' starts a comment."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if "," in value:
            out[key] = [_parse_scalar(v) for v in value.split(",") if v.strip()]
        else:
            out[key] = _parse_scalar(value)
    return out


def apply_overrides(config: dict, overrides) -> dict:
    """Apply repeated --override key=value flags on top of a config."""
    merged = dict(config)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override must look like key=value: {item!r}")
        key, value = item.split("=", 1)
        if "," in value:
            merged[key.strip()] = [_parse_scalar(v) for v in value.split(",")]
        else:
            merged[key.strip()] = _parse_scalar(value)
    return merged


def require_keys(config: dict, schema: dict, command: str) -> dict:
    """Fill defaults and reject unknown keys.

    ``schema`` maps key -> (default, type-or-None); a default of
    ``...`` marks a required key.
    """
    unknown = set(config) - set(schema)
    if unknown:
        raise ConfigError(
            f"unknown config keys for {command}: {sorted(unknown)}")
    out = {}
    for key, (default, caster) in schema.items():
        if key in config:
            value = config[key]
        elif default is ...:
            raise ConfigError(f"{command}: missing required key {key!r}")
        else:
            value = default
        if caster is not None and value is not None and not isinstance(value, list):
            try:
                value = caster(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{command}: bad value for {key!r}: {exc}")
        out[key] = value
    return out
