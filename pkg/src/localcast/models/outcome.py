from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional

from src.localcast.models.node_state import HaltReason, Variant


@dataclass(frozen=True)
class SlotOutcome:
    """Channel resolution for one slot."""

    slot: int
    transmitters: FrozenSet[int]
    # receiver id -> the single sender it decoded
    decodes: Dict[int, int]
    # received power from all other transmitters, own signal excluded
    rx_power: Dict[int, float]
    low_power: FrozenSet[int]


@dataclass
class Trace:
    variant: Variant
    seed: int
    outcomes: List[SlotOutcome] = field(default_factory=list)
    first_success: Dict[int, Optional[int]] = field(default_factory=dict)
    halt_slot: Dict[int, Optional[int]] = field(default_factory=dict)
    halt_reason: Dict[int, HaltReason] = field(default_factory=dict)
    fallback_counts: Dict[int, int] = field(default_factory=dict)
    transmissions: Dict[int, int] = field(default_factory=dict)
    n_x: Dict[int, int] = field(default_factory=dict)
    slots_run: int = 0
    timed_out: bool = False
    # slots in which some broadcast region carried probability mass above 1/2
    mass_violations: List[int] = field(default_factory=list)
    max_mass: float = 0.0
