"""CSV/JSON writers with a self-describing metadata header.

CSV layout: first line ``# {json metadata}``, then a header row, then rows.
Floats are written with ``%.17g`` so a re-run with the same inputs produces
byte-identical files.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Fraction):
        return str(obj)
    if hasattr(obj, "as_dict"):
        return obj.as_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=None) -> str:
    return json.dumps(obj, default=_jsonable, sort_keys=True, indent=indent, allow_nan=True)


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else "%.17g" % v


def with_version(metadata: Mapping) -> dict:
    return {"nvdd_version": __version__, **metadata}


def write_table(path, columns: Mapping[str, object], metadata: Mapping, fmt: str = "csv") -> Path:
    """Write equal-length columns to ``path`` (suffix replaced by the format)."""
    path = Path(path).with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = {name: np.asarray(vals) if not isinstance(vals, list) else vals for name, vals in columns.items()}
    lengths = {len(v) for v in cols.values()}
    if len(lengths) > 1:
        raise ValueError(f"columns have unequal lengths {sorted(lengths)}")
    meta = with_version(metadata)
    if fmt == "json":
        path.write_text(dumps({"metadata": meta, "columns": cols}, indent=1) + "\n")
        return path
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    names = list(cols)
    lines = ["# " + dumps(meta), ",".join(names)]
    n = lengths.pop() if lengths else 0
    for i in range(n):
        lines.append(",".join(_cell(cols[name][i]) for name in names))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path, obj) -> Path:
    path = Path(path).with_suffix(".json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj, indent=1) + "\n")
    return path


def read_csv(path):
    """Inverse of :func:`write_table` for CSV: returns ``(metadata, {name: array})``."""
    lines = Path(path).read_text().splitlines()
    meta = json.loads(lines[0][2:])
    names = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    out = {}
    for j, name in enumerate(names):
        raw = [r[j] for r in rows]
        try:
            out[name] = np.array([float(v) for v in raw])
        except ValueError:
            out[name] = np.array(raw)
    return meta, out
