"""Sampled curves over logarithmic grids and limit-point reports.

The independent variable is always u = log(t).  Curves carry the grid,
the functional name and enough parameter metadata to round-trip through
JSON bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError


@dataclass(frozen=True)
class LogGrid:
    """Uniform grid in u = log(t)."""

    u_min: float
    u_max: float
    count: int

    def __post_init__(self):
        if not (np.isfinite(self.u_min) and np.isfinite(self.u_max)):
            raise SchemaError("grid endpoints must be finite")
        if not self.u_min < self.u_max:
            raise SchemaError("grid requires u_min < u_max")
        if not 2 <= int(self.count) <= 10**7:
            raise SchemaError("grid count must be in [2, 1e7]")

    @property
    def spacing(self) -> float:
        return (self.u_max - self.u_min) / (self.count - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.u_min, self.u_max, self.count)


@dataclass
class Curve:
    """Values of a named functional sampled on a LogGrid."""

    grid: LogGrid
    values: np.ndarray
    functional_name: str
    params: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.count,):
            raise SchemaError("curve length must equal grid count")
        if not np.all(np.isfinite(self.values)):
            raise SchemaError("curve values must be finite")

    def to_json_obj(self) -> dict:
        return {
            "functional": self.functional_name,
            "params": self.params,
            "grid": {"u_min": self.grid.u_min, "u_max": self.grid.u_max, "count": self.grid.count},
            "values": [float(v) for v in self.values],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=1)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Curve":
        g = obj["grid"]
        return cls(
            grid=LogGrid(float(g["u_min"]), float(g["u_max"]), int(g["count"])),
            values=np.array(obj["values"], dtype=float),
            functional_name=str(obj["functional"]),
            params=dict(obj.get("params", {})),
            meta=dict(obj.get("meta", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "Curve":
        return cls.from_json_obj(json.loads(text))

    def to_csv(self) -> str:
        # 17 significant digits: lossless double round-trip, '.' decimal.
        lines = ["u,t_is_exp_u,value"]
        with np.errstate(over="ignore"):
            ts = np.exp(self.grid.points())
        for u, t, v in zip(self.grid.points(), ts, self.values):
            lines.append("%.17g,%.17g,%.17g" % (u, t, v))
        return "\n".join(lines) + "\n"


@dataclass
class LimitEstimate:
    """liminf/limsup report for a curve probed along windows or subsequences."""

    probes: list  # list of (u, value)
    liminf_est: float
    limsup_est: float
    converged: bool
    extrapolated: float | None = None
    tolerance: float | None = None

    def __post_init__(self):
        if self.liminf_est > self.limsup_est + 1e-15:
            raise SchemaError("liminf estimate exceeds limsup estimate")

    @property
    def point_estimate(self) -> float:
        """Best single-number limit guess: extrapolation when available."""
        if self.extrapolated is not None:
            return self.extrapolated
        return self.probes[-1][1]
