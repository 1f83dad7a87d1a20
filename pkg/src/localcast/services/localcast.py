"""
LocalBroadcast1 / LocalBroadcast2 node automata.

The nested outer/inner loops are flattened into a per-slot step:
decide_transmit (draw, budget update, budget halt) followed by observe
(LowPower halt, reception counting, FallBack, inner-loop advance).
Loop entries (outer: clamp p down and reset rc; both: double p) are
recorded as a pending re-entry and applied at the start of the next
decide_transmit.
"""

from typing import Protocol, Tuple

from src.localcast.core.config import logger
from src.localcast.core.exceptions import AutomatonError
from src.localcast.models.node_state import (
    HaltReason,
    NodeState,
    Reentry,
    SlotFeedback,
    Variant,
)
from src.localcast.schemas.scenario import AlgoConsts

P_MAX = 1 / 16


class UniformSource(Protocol):
    def random(self) -> float: ...


def new_node_state(variant: Variant, consts: AlgoConsts) -> NodeState:
    return NodeState(
        variant=Variant(variant),
        n_bound=consts.n_bound,
        log_n=consts.log_n,
        delta=consts.delta,
        gamma=consts.gamma,
        p=1 / (4 * consts.n_bound),
        reentry=Reentry.OUTER,
    )


def _enter_loops(state: NodeState) -> None:
    if state.reentry is Reentry.OUTER:
        state.p = max(state.p_floor, state.p / 32)
        state.rc = 0
    if state.reentry is not Reentry.NONE:
        state.p = min(P_MAX, 2 * state.p)
        state.inner_j = 0
        state.reentry = Reentry.NONE


def decide_transmit(state: NodeState, rng: UniformSource) -> Tuple[bool, NodeState]:
    """
    Run the transmit decision and budget update for one slot.

    Args:
        state: Automaton state, not halted
        rng: Uniform source for the Bernoulli(p) draw

    Returns:
        Whether the node transmits, and the updated state

    Raises:
        AutomatonError: If the node has already halted
    """
    if state.halted:
        raise AutomatonError("decide_transmit called on a halted node")
    _enter_loops(state)

    transmit = rng.random() < state.p
    state.transmitted = transmit
    state.slots_active += 1
    if transmit:
        state.transmissions += 1

    # accumulated whether or not the draw fired
    state.tp += state.p
    if state.tp > state.budget:
        state.halted = True
        state.halt_reason = HaltReason.BUDGET
    return transmit, state


def observe(state: NodeState, fb: SlotFeedback) -> NodeState:
    """
    Apply one slot's channel feedback.

    A state halted by the budget check of this same slot is accepted: under
    LocalBroadcast2 a LowPower transmission still re-labels the halt, since
    the LowPower check precedes the budget check in the algorithm.
    """
    if fb.low_power_while_tx and not state.transmitted:
        raise AutomatonError("LowPower-while-transmitting reported for a silent slot")

    if state.variant is Variant.ALG2 and fb.low_power_while_tx:
        state.halted = True
        state.halt_reason = HaltReason.LOW_POWER_SUCCESS
        return state
    if state.halted:
        return state

    if fb.decoded:
        state.rc += 1
        if state.rc > state.log_n:
            # FallBack: back to the outer loop
            state.rc = 0
            state.fallback_count += 1
            state.reentry = Reentry.OUTER
            logger.debug(f"FallBack #{state.fallback_count} at p={state.p}")
            return state

    state.inner_j += 1
    if state.inner_j >= state.inner_length:
        state.inner_j = 0
        state.reentry = Reentry.INNER
    return state


def effective_p(state: NodeState) -> float:
    """The probability the next decide_transmit will draw with."""
    p = state.p
    if state.reentry is Reentry.OUTER:
        p = max(state.p_floor, p / 32)
    if state.reentry is not Reentry.NONE:
        p = min(P_MAX, 2 * p)
    return p
