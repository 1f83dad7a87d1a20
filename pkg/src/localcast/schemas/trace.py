from typing import List, Optional

from pydantic import BaseModel, Field

from src.localcast.models.node_state import HaltReason, Variant

SUMMARY_COLUMNS = [
    "node_id",
    "n",
    "N_x",
    "wake",
    "halt",
    "first_success",
    "reason",
    "fallbacks",
    "variant",
    "seed",
    "delta",
    "gamma",
    "transmissions",
]


class NodeSummary(BaseModel):
    """One row of the summary CSV: a node's outcome in one trial."""

    node_id: int
    n: int
    N_x: int = Field(ge=1)
    wake: int
    halt: Optional[int] = None
    first_success: Optional[int] = None
    reason: HaltReason = HaltReason.NONE
    fallbacks: int = 0
    variant: Variant = Variant.ALG1
    seed: int = 0
    delta: int = 16
    gamma: float = 8.0
    transmissions: int = 0

    @property
    def active_slots(self) -> Optional[int]:
        return None if self.halt is None else self.halt - self.wake

    @property
    def first_success_slots(self) -> Optional[int]:
        return None if self.first_success is None else self.first_success - self.wake


class TrialSummary(BaseModel):
    variant: Variant
    seed: int
    slots_run: int
    timed_out: bool
    mass_violations: int
    max_mass: float
    nodes: List[NodeSummary]
