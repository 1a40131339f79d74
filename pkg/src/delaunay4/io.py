"""Table and sample-file serialization.

Tables are lists of flat dicts.  CSV output has a header row and writes
floats with 17 significant digits, which round-trips every double; JSON
output is ``{"meta": {...}, "rows": [...]}``.  Both are byte-stable for a
fixed input.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import ValidationError


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x) + 0.0  # folds -0.0 into 0.0
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    fields = list(rows[0])
    for row in rows[1:]:
        fields += [k for k in row if k not in fields]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([format_value(row.get(k)) for k in fields])
    return buf.getvalue()


def render_json(rows: list[dict], meta: dict) -> str:
    return json.dumps({"meta": _jsonable(meta), "rows": _jsonable(rows)}, indent=2,
                      sort_keys=False) + "\n"


def render(rows: list[dict], fmt: str, meta: dict) -> str:
    if fmt == "csv":
        return render_csv(rows)
    if fmt == "json":
        return render_json(rows, meta)
    raise ValidationError(f"unknown format {fmt!r}")


def emit(text: str, path: str | None) -> None:
    """Write to ``path`` or stdout; ``OSError`` propagates for the caller's exit code."""
    if path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(path).write_text(text, encoding="utf-8")


# --- sample files for fitting ---------------------------------------------------

def write_samples(path: str, t, theta, values, meta: dict) -> str:
    """CSV ``t, theta_index, value`` plus a JSON sidecar ``<path>.json`` with the directions."""
    t = np.asarray(t, dtype=float)
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    V = np.asarray(values, dtype=float)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "theta_index", "value"])
    for i, ti in enumerate(t):
        for k in range(theta.shape[0]):
            writer.writerow([format_value(ti), k, format_value(V[i, k])])
    sidecar = sidecar_path(path)
    side = {"meta": _jsonable(meta), "dimension": int(theta.shape[1]),
            "theta": [[format_value(c) for c in row] for row in theta]}
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
    Path(sidecar).write_text(json.dumps(side, indent=2) + "\n", encoding="utf-8")
    return sidecar


def sidecar_path(path: str) -> str:
    return str(path) + ".json"


def read_samples(path: str, sidecar: str | None = None):
    """Inverse of :func:`write_samples`: returns ``(t, theta, values, meta)``."""
    side = json.loads(Path(sidecar or sidecar_path(path)).read_text(encoding="utf-8"))
    theta = np.array([[float(c) for c in row] for row in side["theta"]])
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["t", "theta_index", "value"]:
            raise ValidationError(f"unexpected sample header {header}")
        data = [(float(a), int(b), float(c)) for a, b, c in reader]
    if not data:
        raise ValidationError("sample file has no rows")
    times = sorted({d[0] for d in data})
    index = {tv: i for i, tv in enumerate(times)}
    V = np.full((len(times), theta.shape[0]), np.nan)
    for tv, k, val in data:
        if not 0 <= k < theta.shape[0]:
            raise ValidationError(f"theta index {k} outside the sidecar grid")
        V[index[tv], k] = val
    if np.isnan(V).any():
        raise ValidationError("sample file does not cover every (t, theta) pair")
    return np.array(times), theta, V, side.get("meta", {})
