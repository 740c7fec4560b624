"""The n-stage threshold schedule shared by the solver, the oracle and the policy compiler."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import InvalidParameter
from .model import StageInterval


@dataclass(frozen=True)
class Schedule:
    """Thresholds ``taus[i]`` applied on ``[T_i, T_{i+1})`` with T_0 = 0, T_n = horizon.

    ``boundaries`` holds only the interior switch times T_1 .. T_{n-1}.
    Solver metadata is excluded from equality.
    """

    taus: tuple[float, ...]
    boundaries: tuple[float, ...] = ()
    horizon: float = math.inf
    corners: tuple[bool, ...] = field(default=(), compare=False)
    clamped: tuple[bool, ...] = field(default=(), compare=False)
    objective: float | None = field(default=None, compare=False)
    converged: bool = field(default=True, compare=False)
    method: str = field(default="given", compare=False)
    iterations: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "boundaries", tuple(float(t) for t in self.boundaries))
        if not self.taus:
            raise InvalidParameter("a schedule needs at least one stage")
        if len(self.boundaries) != len(self.taus) - 1:
            raise InvalidParameter(
                f"{len(self.taus)} stages need {len(self.taus) - 1} boundaries, "
                f"got {len(self.boundaries)}"
            )
        for tau in self.taus:
            if not 0.0 <= tau <= 1.0:
                raise InvalidParameter(f"threshold {tau!r} outside [0, 1]")
        edges = (0.0, *self.boundaries, self.horizon)
        for lo, hi in zip(edges, edges[1:]):
            if not hi > lo:
                raise InvalidParameter(f"stage boundaries must strictly increase: {edges}")

    @property
    def n_stages(self) -> int:
        return len(self.taus)

    @property
    def edges(self) -> tuple[float, ...]:
        return (0.0, *self.boundaries, self.horizon)

    @property
    def intervals(self) -> list[StageInterval]:
        edges = self.edges
        return [StageInterval(lo, hi) for lo, hi in zip(edges, edges[1:])]

    def to_json(self) -> str:
        data = {
            "taus": list(self.taus),
            "boundaries": list(self.boundaries),
            "horizon": None if math.isinf(self.horizon) else self.horizon,
        }
        return json.dumps(data, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Schedule":
        data = json.loads(text)
        horizon = data.get("horizon")
        return cls(
            taus=tuple(data["taus"]),
            boundaries=tuple(data.get("boundaries", ())),
            horizon=math.inf if horizon is None else float(horizon),
        )
