"""Turn an optimised schedule into a concrete m-of-n spend policy with timelocks.

The output is a small canonical JSON document meant for wallet tooling (a
descriptor or miniscript generator, say).  No script bytes are produced here.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import CollisionUnresolvable, InvalidParameter
from .formatting import fmt_real, quantize
from .schedule import Schedule

# Slack so that tau * n landing a hair above an integer (2/3 * 3, say) does
# not round up to the next signer.
_CEIL_SLACK = 1e-9


class Unit(enum.Enum):
    SECONDS = "seconds"
    BLOCKS = "blocks"
    ABSTRACT = "abstract"


@dataclass(frozen=True)
class PolicyStage:
    m: int
    activates_at: int
    raw_tau: float
    rounding_note: str
    # Key count for this stage when it differs from the document's n.
    n: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "raw_tau", quantize(self.raw_tau))


@dataclass(frozen=True)
class PolicyDocument:
    n: int
    stages: tuple[PolicyStage, ...]
    unit: Unit = Unit.ABSTRACT
    unit_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "unit", Unit(self.unit))
        object.__setattr__(self, "unit_scale", quantize(self.unit_scale))
        if self.n < 1:
            raise InvalidParameter("n must be >= 1")
        if not self.unit_scale > 0:
            raise InvalidParameter("unit_scale must be positive")
        if not self.stages:
            raise InvalidParameter("a policy needs at least one stage")
        if self.stages[0].activates_at != 0:
            raise InvalidParameter("the first stage must activate at 0")
        for prev, cur in zip(self.stages, self.stages[1:]):
            if not cur.activates_at > prev.activates_at:
                raise InvalidParameter("stage activation times must strictly increase")
        for stage in self.stages:
            n = stage.n or self.n
            if not 1 <= stage.m <= n:
                raise InvalidParameter(f"m = {stage.m} outside [1, {n}]")


def threshold_to_m(tau: float, n: int) -> int:
    """Signers required for threshold ``tau`` out of ``n``: ceil(tau n) clamped to [1, n].

    Rounding up never realises a fraction below the optimum.
    """
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    return min(n, max(1, math.ceil(tau * n - _CEIL_SLACK)))


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def compile_policy(
    schedule: Schedule,
    n: int,
    unit: Unit | str = Unit.ABSTRACT,
    unit_scale: float = 1.0,
    n_overrides: Sequence[int] | None = None,
) -> PolicyDocument:
    """One policy stage per schedule stage.

    Stage i activates at round(T_{i-1} * unit_scale); a collision with the
    previous stage is resolved by bumping one tick later.  ``n_overrides``
    gives a per-stage key count (a final 1-of-1 fallback key, for instance).
    """
    if not unit_scale > 0:
        raise InvalidParameter("unit_scale must be positive")
    if n_overrides is not None and len(n_overrides) != schedule.n_stages:
        raise InvalidParameter("n_overrides needs one entry per stage")
    limit = None
    if math.isfinite(schedule.horizon):
        limit = _round_half_up(schedule.horizon * unit_scale)

    stages = []
    previous = None
    for i, (tau, start) in enumerate(zip(schedule.taus, schedule.edges)):
        stage_n = n_overrides[i] if n_overrides is not None else n
        at = _round_half_up(start * unit_scale)
        if previous is not None and at <= previous:
            at = previous + 1
        if limit is not None and at >= limit:
            raise CollisionUnresolvable(
                f"stage {i + 1} would activate at {at}, at or past the horizon tick {limit}"
            )
        m = threshold_to_m(tau, stage_n)
        note = f"ceil({fmt_real(tau)}*{stage_n})={m}; realized {fmt_real(m / stage_n)}"
        stages.append(PolicyStage(m, at, tau, note, stage_n if stage_n != n else None))
        previous = at
    return PolicyDocument(n, tuple(stages), Unit(unit), unit_scale)


def serialize_policy(doc: PolicyDocument) -> str:
    """Canonical text: fixed key order, two-space indent, 9-digit reals."""
    lines = [
        "{",
        f'  "n": {doc.n},',
        f'  "unit": {json.dumps(doc.unit.value)},',
        f'  "unit_scale": {fmt_real(doc.unit_scale)},',
        '  "stages": [',
    ]
    for i, stage in enumerate(doc.stages):
        fields = [f'"m": {stage.m}']
        if stage.n is not None:
            fields.append(f'"n": {stage.n}')
        fields += [
            f'"activates_at": {stage.activates_at}',
            f'"raw_tau": {fmt_real(stage.raw_tau)}',
            f'"rounding_note": {json.dumps(stage.rounding_note)}',
        ]
        lines.append("    {")
        lines.extend(f"      {f}," for f in fields[:-1])
        lines.append(f"      {fields[-1]}")
        lines.append("    }," if i + 1 < len(doc.stages) else "    }")
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def parse_policy(text: str) -> PolicyDocument:
    data = json.loads(text)
    stages = tuple(
        PolicyStage(
            m=int(s["m"]),
            activates_at=int(s["activates_at"]),
            raw_tau=float(s["raw_tau"]),
            rounding_note=s["rounding_note"],
            n=int(s["n"]) if "n" in s else None,
        )
        for s in data["stages"]
    )
    return PolicyDocument(int(data["n"]), stages, Unit(data["unit"]), float(data["unit_scale"]))


def example_degrading_policy() -> PolicyDocument:
    """Treasury example: 2-of-3 officers, then 1-of-3 after a year, then 1-of-1 after five.

    Timelocks are in blocks at 144 blocks a day.
    """
    schedule = Schedule(taus=(2 / 3, 1 / 3, 1.0), boundaries=(1.0, 5.0))
    return compile_policy(schedule, 3, Unit.BLOCKS, 144 * 365, n_overrides=(3, 3, 1))
