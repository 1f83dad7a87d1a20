from dataclasses import dataclass
from enum import Enum


class Variant(str, Enum):
    ALG1 = "alg1"
    # Algorithm 1 plus the received-power halting rule
    ALG2 = "alg2"


class HaltReason(str, Enum):
    NONE = "none"
    BUDGET = "budget"
    LOW_POWER_SUCCESS = "low_power_success"


class Reentry(str, Enum):
    """Loop-entry steps still owed before the next transmit decision."""

    NONE = "none"
    # doubling only (a new inner-loop pass)
    INNER = "inner"
    # clamp to max{1/(128n), p/32}, reset rc, then double
    OUTER = "outer"


@dataclass(slots=True)
class NodeState:
    """
    One node's LocalBroadcast automaton.

    p is the listing's p_y; while a re-entry is pending it holds the value
    from before the pending clamp/doubling.
    """

    variant: Variant
    n_bound: int
    log_n: int
    delta: int
    gamma: float
    p: float
    tp: float = 0.0
    rc: int = 0
    inner_j: int = 0
    reentry: Reentry = Reentry.OUTER
    halted: bool = False
    halt_reason: HaltReason = HaltReason.NONE
    fallback_count: int = 0
    slots_active: int = 0
    transmissions: int = 0
    transmitted: bool = False

    @property
    def p_floor(self) -> float:
        return 1 / (128 * self.n_bound)

    @property
    def inner_length(self) -> int:
        return self.delta * self.log_n

    @property
    def budget(self) -> float:
        return self.gamma * self.log_n


@dataclass(frozen=True, slots=True)
class SlotFeedback:
    decoded: bool = False
    low_power_while_tx: bool = False
