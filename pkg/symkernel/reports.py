"""
CSV and JSON report writers.

Floats are written with 17 significant digits so that every value parses back
to the same double. Columns are laid out one value per column with a single
header line, which gnuplot reads with ``set datafile separator ','``.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Sequence

import numpy as np

from .errors import ComputationError

logger = logging.getLogger("SYMKERNEL")

SPACES_SCHEMA = ("space", "rank", "dim", "rho_norm", "beta", "rho_min")
ENVELOPE_SCHEMA = ("space", "x_plus", "d", "t_or_s", "value", "log_value", "branch")
VOLUME_SCHEMA = (
    "space",
    "x_plus",
    "epsilon",
    "envelope",
    "quadrature",
    "std_error",
    "ratio",
)
VALIDATE_SCHEMA = ("case", "r", "t_or_s", "exact", "envelope", "ratio")
SUMMARY_SCHEMA = ("case", "count", "min_ratio", "max_ratio", "geometric_mean", "spread", "passed")
SAMPLES_SCHEMA = ("word_length", "dist", "rho_radial")


def format_value(value: Any) -> str:
    """Render one cell; NaN is a computation error"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            raise ComputationError("NaN in report row")
        return format(float(value), ".17g")
    if isinstance(value, (tuple, list, np.ndarray)):
        return ";".join(format_value(v) for v in value)
    return str(value)


def emit_report(rows: Iterable[Mapping[str, Any]], schema: Sequence[str], path: Path) -> Path:
    """Write rows as CSV with the schema's column order; empty rows give a header-only file"""
    lines = []
    for i, row in enumerate(rows):
        missing = [column for column in schema if column not in row]
        if missing:
            raise ComputationError(f"Row {i} is missing columns {missing}")
        lines.append([format_value(row[column]) for column in schema])

    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(schema)
            writer.writerows(lines)
    except OSError as e:
        logger.error(f"Error writing report {path}: {str(e)}")
        raise ComputationError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote {len(lines)} rows to {path}")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def emit_json(data: Mapping[str, Any], path: Path) -> Path:
    """Write a JSON summary with sorted keys; non-finite floats become null"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_jsonable(dict(data)), f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        logger.error(f"Error writing report {path}: {str(e)}")
        raise ComputationError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote {path}")
    return path


def ratio_summary(ratios: Sequence[float]) -> Dict[str, float]:
    """min, max, geometric mean and max/min of a set of positive ratios"""
    values = np.asarray(ratios, dtype=float)
    if values.size == 0:
        raise ComputationError("Cannot summarize an empty set of ratios")
    if np.any(~np.isfinite(values)) or np.any(values <= 0.0):
        raise ComputationError("Ratios must be finite and positive")
    low, high = float(values.min()), float(values.max())
    return {
        "count": int(values.size),
        "min_ratio": low,
        "max_ratio": high,
        "geometric_mean": float(np.exp(np.mean(np.log(values)))),
        "spread": high / low,
    }
