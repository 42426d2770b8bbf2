"""Deterministic text output: fixed float formatting for JSON and CSV.

Every float is written with 17 significant digits in lowercase scientific
notation, so identical runs produce byte-identical files and values
round-trip exactly.
"""

import json
import math

import numpy as np


def format_float(x):
    """17 significant digits, lowercase scientific; non-finite values as strings."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".16e")


def _json_value(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format_float(x) if math.isfinite(x) else f'"{format_float(x)}"'
    if isinstance(obj, str):
        return _json_string(obj)
    if isinstance(obj, np.ndarray):
        return _json_value(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_string(str(k))}: {_json_value(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _json_value(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _json_string(s):
    return json.dumps(s, ensure_ascii=False)


def dumps(obj, indent=2):
    """Serialize to JSON text with fixed float formatting and insertion-ordered keys.

    Non-finite floats are written as the strings "inf", "-inf" or "nan".
    """
    return _json_value(obj, indent, 0) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def csv_text(names, data):
    """Comma-separated text with a header row; floats in the fixed format."""
    rows = [",".join(names)]
    data = np.atleast_2d(np.asarray(data, dtype=float))
    for row in data:
        rows.append(",".join(format_float(v) for v in row))
    return "\n".join(rows) + "\n"


def write_csv(path, names, data):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(csv_text(names, data))


def read_csv(path):
    """Read a file written by write_csv: (column names, 2D float array)."""
    with open(path, encoding="utf-8") as fh:
        names = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return names, data
