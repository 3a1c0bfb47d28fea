"""
CSV and JSON writers for study outputs.
"""

import json
import logging
import os
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from rkhs_gof.config import AGE_RANGE_YEARS, CLEARANCE_AGE_GRID_STEP

logger = logging.getLogger("Report-Tables")


def _ensure_parent(path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_table(frame: pd.DataFrame, path: str, provenance: Optional[Dict[str, Any]] = None) -> str:
    """
    Writes ``frame`` as CSV; provenance fields become constant columns.

    Returns:
        str: The path written.
    """
    _ensure_parent(path)
    frame = frame.copy()
    for key, value in (provenance or {}).items():
        frame[key] = value
    frame.to_csv(path, index=isinstance(frame.index, pd.MultiIndex))
    logger.info(f"Table with {len(frame)} rows written to {path}")
    return path


def write_record(record: Dict[str, Any], path: str) -> str:
    """Writes one JSON record with sorted keys."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(record, handle, indent=2, sort_keys=True, default=_jsonable)
        handle.write("\n")
    logger.info(f"Record written to {path}")
    return path


def age_grid(step: float = CLEARANCE_AGE_GRID_STEP) -> np.ndarray:
    """Ages from 0 to 20 years in steps of ``step``, both ends included."""
    low, high = AGE_RANGE_YEARS
    return np.linspace(low, high, int(round((high - low) / step)) + 1)


def clearance_curve_frame(fit: Any, step: float = CLEARANCE_AGE_GRID_STEP) -> pd.DataFrame:
    """Fitted CL*(a) in mL/day on the age grid."""
    ages = age_grid(step)
    return pd.DataFrame({"age": ages, "cl_star": fit.clearance_curve(ages)})
