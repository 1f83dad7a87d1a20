from typing import List, Optional, Tuple

from src.localcast.core.config import logger
from src.localcast.models.node_state import Variant
from src.localcast.schemas.experiment import GeneratorSpec, SweepConfig
from src.localcast.schemas.trace import NodeSummary, TrialSummary
from src.localcast.services.scenario_service import generate_scenario
from src.localcast.services.sim import parallel_map, run, summarize

SweepJob = Tuple[GeneratorSpec, Variant, int, Optional[int]]


def sweep_cells(config: SweepConfig) -> List[GeneratorSpec]:
    """
    One generator spec per grid cell.

    Clustered cells place a single cluster of m nodes (so N_x = m) under the
    common bound n; cells with m > n are skipped.
    """
    cells = []
    for n in config.n_values:
        if config.kind == "uniform_square":
            cells.append(
                GeneratorSpec(
                    kind="uniform_square",
                    n=n,
                    n_bound=max(n, 2),
                    wake=config.wake,
                    delta=config.delta,
                    gamma=config.gamma,
                )
            )
            continue
        for m in config.cluster_sizes:
            if m > n:
                logger.warning(f"Skipping cluster size {m} above n_bound {n}")
                continue
            cells.append(
                GeneratorSpec(
                    kind="clustered",
                    n=m,
                    n_bound=n,
                    wake=config.wake,
                    delta=config.delta,
                    gamma=config.gamma,
                )
            )
    return cells


def sweep_jobs(config: SweepConfig) -> List[SweepJob]:
    """Every (cell, variant, trial seed); trial k uses seed config.seed + k for layout and run."""
    return [
        (cell, variant, config.seed + k, config.max_slots)
        for variant in config.variants
        for cell in sweep_cells(config)
        for k in range(config.trials)
    ]


def run_sweep_job(job: SweepJob) -> TrialSummary:
    spec, variant, seed, max_slots = job
    scenario = generate_scenario(spec.model_copy(update={"seed": seed}))
    trace = run(scenario, variant, seed, max_slots, record_outcomes=False)
    return summarize(trace, scenario)


def run_sweep(config: SweepConfig, workers: Optional[int] = None) -> List[TrialSummary]:
    """
    Run the whole grid in parallel.

    Results come back in job order (variant, cell, seed), never in arrival order.
    """
    jobs = sweep_jobs(config)
    logger.info(f"Sweep: {len(jobs)} trials over {len(jobs) // config.trials} cells")
    summaries = parallel_map(run_sweep_job, jobs, workers)
    timed_out = sum(summary.timed_out for summary in summaries)
    if timed_out:
        logger.warning(f"Sweep: {timed_out} trials timed out")
    return summaries


def summary_rows(summaries: List[TrialSummary]) -> List[NodeSummary]:
    return [row for summary in summaries for row in summary.nodes]
