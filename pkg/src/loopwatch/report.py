"""Deterministic JSON serialisation for reports."""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

SCHEMA = "loopwatch-report/1"
SIG_DIGITS = 12


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        x = float(f"{x:.{SIG_DIGITS}g}")
        return 0.0 if x == 0 else x
    return obj


def dumps(payload: dict, indent: int | None = 2) -> str:
    """Serialise with 12 significant digits so repeated runs are byte-identical."""
    return json.dumps(_clean({"schema": SCHEMA, **payload}), indent=indent) + "\n"
