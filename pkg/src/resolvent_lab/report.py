"""Bit-stable JSON and CSV emission."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np


def fmt_float(x: float) -> str:
    """17 significant digits in scientific notation."""
    return format(float(x), ".16e")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj.tolist() if isinstance(obj, np.ndarray) else obj)
        if not seq:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt_float(x) if math.isfinite(x) else "null"
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag], indent, level)
    return json.dumps(str(obj))


def dumps(obj, indent: int = 1) -> str:
    return _encode(obj, indent, 0) + "\n"


def emit_report(results, fmt: str, path) -> None:
    """Write ``results`` as JSON (any nesting) or CSV (``{"header", "rows"}``)."""
    path = Path(path)
    if fmt == "json":
        text = dumps(results)
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(results["header"])
        for row in results["rows"]:
            w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown format {fmt!r}")
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
