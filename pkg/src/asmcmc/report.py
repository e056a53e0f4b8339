"""Report container used by every numerical check."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


@dataclass
class BoundReport:
    """Outcome of one numerical check.

    ``values`` holds the observed quantities over ``grid``; ``fitted`` holds
    constants estimated from them.  ``passed`` is the gate.
    """

    name: str
    quantity: str
    grid: list = field(default_factory=list)
    values: list = field(default_factory=list)
    threshold: Any = None
    passed: bool = False
    fitted: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    gated: bool = True

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "name": self.name,
                "params": self.params,
                "quantity": self.quantity,
                "grid": self.grid,
                "values": self.values,
                "threshold": self.threshold,
                "fitted": self.fitted,
                "pass": bool(self.passed),
                "gated": self.gated,
                "notes": self.notes,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)
