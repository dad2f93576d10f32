"""CSV and JSON serialization of results.

Floats are written with ``repr``, the shortest string that parses back to
the same double, so files round-trip exactly and reruns are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

__all__ = [
    "SPECTRUM_COLUMNS",
    "RESOLUTION_COLUMNS",
    "THEORY_COLUMNS",
    "SCATTER_COLUMNS",
    "format_value",
    "write_table",
    "write_structured",
    "read_table",
]

SPECTRUM_COLUMNS = ("lambda_nm", "alpha2_mean", "alpha2_stderr", "absorbance",
                    "advantage_pct", "advantage_stderr_pct", "theory_max_pct")
RESOLUTION_COLUMNS = ("k", "n_fock", "n_coherent", "n_saved")
THEORY_COLUMNS = ("alpha", "delta_alpha_fock", "delta_alpha_snl", "fisher_fock",
                  "fisher_snl", "advantage_pct")
SCATTER_COLUMNS = ("sample", "mode", "integration_time_s", "n_photons", "alpha_mean",
                   "delta_alpha")


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        # JSON has no inf/nan; strings keep the document standard
        if not math.isfinite(obj):
            return repr(obj)
        return obj
    return obj


def write_structured(path, document: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(document), indent=2, sort_keys=True) + "\n")
    return path


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
