from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, TypeVar

import numpy as np

from src.localcast.core.config import logger, settings, worker_count
from src.localcast.models.node_state import HaltReason, NodeState, SlotFeedback, Variant
from src.localcast.models.outcome import SlotOutcome, Trace
from src.localcast.schemas.scenario import Scenario
from src.localcast.schemas.trace import NodeSummary, TrialSummary
from src.localcast.services.channel import resolve_slot
from src.localcast.services.geometry import (
    cover_constant,
    eligible_receivers,
    transmission_count,
)
from src.localcast.services.localcast import (
    decide_transmit,
    effective_p,
    new_node_state,
    observe,
)
from src.localcast.services.rng import NodeStream

MASS_LIMIT = 0.5

T = TypeVar("T")


def default_max_slots(scenario: Scenario) -> int:
    """
    MAX_SLOTS_FACTOR inner loops per node of n_bound + log n, counted from the last wake-up.

    A full clique of n_bound nodes under LocalBroadcast1 needs about 17 such
    units, so the cap only fires on trials that are genuinely stuck.
    """
    consts = scenario.consts
    last_wake = max((node.wake for node in scenario.nodes), default=0)
    return settings.MAX_SLOTS_FACTOR * consts.inner_length * (consts.n_bound + consts.log_n) + last_wake


def success_in_slot(scenario: Scenario, x: int, slot_outcome: SlotOutcome) -> bool:
    """Whether every node x owes delivery to decoded x in this slot."""
    receivers = eligible_receivers(scenario, x, slot_outcome.slot)
    return all(slot_outcome.decodes.get(y) == x for y in receivers)


def run(
    scenario: Scenario,
    variant: Variant,
    seed: int,
    max_slots: Optional[int] = None,
    record_outcomes: bool = True,
    check_mass: bool = True,
) -> Trace:
    """
    Simulate one trial of the slotted network.

    Args:
        scenario: Nodes, physics and constants
        variant: Which automaton every node runs
        seed: Trial seed; per-node streams are keyed by (seed, node id)
        max_slots: Slot cap, defaults to a generous multiple of the running-time bound
        record_outcomes: Keep every SlotOutcome in the trace
        check_mass: Track the per-region transmit probability mass

    Returns:
        Trace of the trial
    """
    variant = Variant(variant)
    if max_slots is None:
        max_slots = default_max_slots(scenario)
    if max_slots < 1:
        raise ValueError("max_slots must be at least 1")

    deployment = scenario.deployment
    nodes = scenario.nodes
    trace = Trace(variant=variant, seed=seed)
    for node in nodes:
        trace.first_success[node.id] = None
        trace.halt_slot[node.id] = None
        trace.halt_reason[node.id] = HaltReason.NONE
        trace.n_x[node.id] = transmission_count(scenario, node.id)

    streams = {node.id: NodeStream(seed, node.id) for node in nodes}
    states: Dict[int, NodeState] = {}
    region_matrix = deployment.region_matrix(scenario.phys.r_b) if check_mass and nodes else None
    p_now = np.zeros(len(nodes))

    logger.info(
        f"Trial start: {len(nodes)} nodes, n_bound={scenario.n_bound}, variant={variant.value}, "
        f"seed={seed}, cover constant={cover_constant(scenario.phys)}"
    )

    finished = not nodes
    for slot in range(0 if finished else max_slots):
        awake = [node.id for node in nodes if node.awake_at(slot)]
        for x in awake:
            if x not in states:
                states[x] = new_node_state(variant, scenario.consts)
        active = [x for x in awake if not states[x].halted]

        if region_matrix is not None and active:
            p_now[:] = 0.0
            for x in active:
                p_now[deployment.index[x]] = effective_p(states[x])
            mass = region_matrix @ p_now
            peak = float(mass.max())
            trace.max_mass = max(trace.max_mass, peak)
            if peak > MASS_LIMIT:
                trace.mass_violations.append(slot)
                logger.warning(f"Slot {slot}: broadcast-region probability mass {peak:.4f} > 1/2")

        transmitters = [x for x in active if decide_transmit(states[x], streams[x])[0]]
        outcome = resolve_slot(scenario, slot, transmitters, awake)

        for x in transmitters:
            if trace.first_success[x] is None and success_in_slot(scenario, x, outcome):
                trace.first_success[x] = slot

        for x in active:
            state = states[x]
            feedback = SlotFeedback(
                decoded=x in outcome.decodes,
                low_power_while_tx=state.transmitted and x in outcome.low_power,
            )
            observe(state, feedback)
            if state.halted:
                trace.halt_slot[x] = slot
                trace.halt_reason[x] = state.halt_reason

        if record_outcomes:
            trace.outcomes.append(outcome)

        finished = all(
            (node.id in states and states[node.id].halted)
            or (node.shutdown is not None and node.shutdown <= slot + 1)
            for node in nodes
        )
        trace.slots_run = slot + 1
        if finished:
            break

    trace.timed_out = not finished
    for node in nodes:
        state = states.get(node.id)
        trace.fallback_counts[node.id] = state.fallback_count if state else 0
        trace.transmissions[node.id] = state.transmissions if state else 0

    if trace.timed_out:
        logger.warning(f"Trial seed={seed} timed out after {trace.slots_run} slots")
    logger.info(
        f"Trial end: seed={seed}, slots={trace.slots_run}, "
        f"succeeded={sum(v is not None for v in trace.first_success.values())}/{len(nodes)}"
    )
    return trace


def summarize(trace: Trace, scenario: Scenario) -> TrialSummary:
    rows = [
        NodeSummary(
            node_id=node.id,
            n=scenario.n_bound,
            N_x=trace.n_x[node.id],
            wake=node.wake,
            halt=trace.halt_slot[node.id],
            first_success=trace.first_success[node.id],
            reason=trace.halt_reason[node.id],
            fallbacks=trace.fallback_counts[node.id],
            variant=trace.variant,
            seed=trace.seed,
            delta=scenario.consts.delta,
            gamma=scenario.consts.gamma,
            transmissions=trace.transmissions[node.id],
        )
        for node in scenario.nodes
    ]
    return TrialSummary(
        variant=trace.variant,
        seed=trace.seed,
        slots_run=trace.slots_run,
        timed_out=trace.timed_out,
        mass_violations=len(trace.mass_violations),
        max_mass=trace.max_mass,
        nodes=rows,
    )


def _summary_job(job) -> TrialSummary:
    scenario, variant, seed, max_slots = job
    trace = run(scenario, variant, seed, max_slots, record_outcomes=False)
    return summarize(trace, scenario)


def parallel_map(fn: Callable[..., T], jobs: Iterable, workers: Optional[int] = None) -> List[T]:
    """
    Map a picklable top-level function over jobs, preserving job order.

    Runs inline when only one worker is available.
    """
    jobs = list(jobs)
    workers = workers or worker_count()
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))


def run_trials(
    scenario: Scenario,
    variant: Variant,
    seeds: Iterable[int],
    max_slots: Optional[int] = None,
    workers: Optional[int] = None,
) -> List[TrialSummary]:
    """Independent trials in parallel, returned in seed order."""
    jobs = [(scenario, Variant(variant), seed, max_slots) for seed in sorted(seeds)]
    return parallel_map(_summary_job, jobs, workers)
