"""Deterministic CSV / JSON / SVG artifacts plus a timestamped sidecar."""

import csv
import io
import json
import math
import os
import time

import numpy as np

PHASE_COLUMNS = ("N", "m", "s", "p", "q", "trials", "success_rate", "mean_err", "max_err", "seed")
WIDTH_COLUMNS = ("N", "m", "p", "q", "empirical_lower", "certified_upper", "upper_method", "rate",
                 "alt_rate", "vybiral", "lower_ratio", "upper_ratio", "delta_2s", "seed")
PACK_COLUMNS = ("N", "s", "size", "bound", "max_overlap", "ok")


def format_value(v):
    """Canonical text for a CSV cell: shortest round-trip repr for floats."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else format_value(v)
    return obj


def csv_text(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(row.get(c)) for c in columns])
    return buf.getvalue()


def json_text(payload):
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def emit_outputs(out_dir, name, rows, columns, payload, svg=None, meta=None):
    """Write ``name``.csv/.json[/.svg] (deterministic) and ``name``.meta.json (timestamps).

    Returns the list of deterministic artifact paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, f"{name}.csv"), os.path.join(out_dir, f"{name}.json")]
    _write(paths[0], csv_text(rows, columns))
    _write(paths[1], json_text(payload))
    if svg is not None:
        paths.append(os.path.join(out_dir, f"{name}.svg"))
        _write(paths[-1], svg)
    sidecar = {"written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"), **(meta or {})}
    _write(os.path.join(out_dir, f"{name}.meta.json"), json_text(sidecar))
    return paths
