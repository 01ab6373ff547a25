"""Per-evaluation output rows."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    measure_name: str
    measure_value: float
    alpha_snapshot: tuple = field(default_factory=tuple)
    wall_seconds: float = 0.0
