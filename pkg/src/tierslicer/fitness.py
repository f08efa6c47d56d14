"""Offline-availability fitness of a placement.

Per slice: the fraction of its calls that stay local (1.0 for call-free
slices, which then carry zero weight).  Per program: the call-count-weighted
mean over slices, which is algebraically the flat ratio of local calls to
total calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import PlacementProblem
from .placement import Placement, classify_calls, violations


@dataclass
class SliceFitness:
    offline_fraction: float
    local_calls: int
    total_calls: int


@dataclass
class FitnessReport:
    per_slice: dict = field(default_factory=dict)  # name -> SliceFitness
    program: float = 1.0
    valid: bool = True

    def to_dict(self) -> dict:
        return {
            "program": self.program,
            "valid": self.valid,
            "perSlice": {
                name: {
                    "offlineFraction": sf.offline_fraction,
                    "localCalls": sf.local_calls,
                    "totalCalls": sf.total_calls,
                }
                for name, sf in self.per_slice.items()
            },
        }


def slice_offline(slice_name: str, classified) -> float:
    """local/total for one slice; 1.0 when the slice performs no calls."""
    local = total = 0
    for c in classified:
        if c.record.caller == slice_name:
            total += 1
            local += c.local
    return local / total if total else 1.0


def program_offline(problem: PlacementProblem, classified) -> float:
    """Call-count-weighted mean of per-slice offline fractions."""
    weighted = weight = 0.0
    for name in problem.slices:
        total = sum(1 for c in classified if c.record.caller == name)
        weighted += slice_offline(name, classified) * total
        weight += total
    return weighted / weight if weight else 1.0


def evaluate(problem: PlacementProblem, placement: Placement) -> FitnessReport:
    classified = classify_calls(problem, placement)
    per_slice = {}
    for name in problem.slices:
        mine = [c for c in classified if c.record.caller == name]
        local = sum(1 for c in mine if c.local)
        per_slice[name] = SliceFitness(
            offline_fraction=local / len(mine) if mine else 1.0,
            local_calls=local,
            total_calls=len(mine),
        )
    return FitnessReport(
        per_slice=per_slice,
        program=program_offline(problem, classified),
        valid=not violations(classified),
    )


def offline_percent(value: float) -> int:
    """Rounded integer percent used by the report header."""
    return int(round(value * 100))
