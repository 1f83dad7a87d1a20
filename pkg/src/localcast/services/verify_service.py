"""
Verification suites over simulated corpora and the lower-bound numerics.

Each suite returns a SuiteResult; a suite passes only with zero violations
(or, for the statistical suites, the frozen acceptance fractions).
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.localcast.core.config import logger
from src.localcast.core.exceptions import LocalcastError
from src.localcast.models.node_state import Variant
from src.localcast.schemas.experiment import GeneratorSpec
from src.localcast.schemas.scenario import PhysParams
from src.localcast.schemas.trace import NodeSummary, TrialSummary
from src.localcast.services.analysis import success_stats, transmission_stats
from src.localcast.services.channel import sinr_decodes
from src.localcast.services.geometry import cover_constant, region_members
from src.localcast.services.lowerbound import (
    RangePartition,
    aggregate_bound_check,
    calculus_claim_check,
    chain_check,
    peak_single_tx_check,
    range_sweep_check,
)
from src.localcast.services.scenario_service import generate_scenario
from src.localcast.services.sim import parallel_map, run, summarize

SUITES = ("lemma-a1", "mass", "disjoint", "success-halt", "tx-counts", "calculus", "chain")
CORPUS_N = (64, 128, 256)
# clustered corpus layouts put this many nodes in each cluster
CORPUS_CLUSTER = 32
MIN_BUDGET_SUCCESS = 0.98
MIN_TX_INSIDE = 0.99


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checked: int
    violations: int
    details: Dict[str, float] = field(default_factory=dict)

    def to_record(self) -> dict:
        """JSON-ready record with plain Python scalars."""
        return {
            "suite": self.name,
            "passed": bool(self.passed),
            "checked": int(self.checked),
            "violations": int(self.violations),
            "details": {
                key: value.item() if isinstance(value, np.generic) else value
                for key, value in self.details.items()
            },
        }


@dataclass(frozen=True)
class SlotScan:
    slots: int
    a1_checks: int
    a1_violations: int
    disjoint_checks: int
    disjoint_violations: int
    timed_out: bool = False


@dataclass
class VerifyOptions:
    n: int = 128
    trials: int = 50
    seed: int = 0
    corpus_n: Sequence[int] = CORPUS_N
    mc_trials: int = 10**5
    chain_n: int = 2**10
    max_slots: Optional[int] = None
    workers: Optional[int] = None


def scan_trial(job: Tuple[int, int, Optional[int]]) -> SlotScan:
    """
    Run one LocalBroadcast2 trial on a uniform square and scan every slot.

    For each transmitter with LowPower, every awake non-transmitting node in
    its 2B_x must decode it under the exact SINR rule; and no awake node may
    have two LowPower transmitters inside its own broadcast ball.
    """
    n, seed, max_slots = job
    scenario = generate_scenario(GeneratorSpec(kind="uniform_square", n=n, seed=seed))
    trace = run(scenario, Variant.ALG2, seed, max_slots, check_mass=False)
    r_b = scenario.phys.r_b

    a1_checks = a1_violations = disjoint_checks = disjoint_violations = 0
    for outcome in trace.outcomes:
        tx = outcome.transmitters
        lp_tx = sorted(outcome.low_power & tx)
        if not lp_tx:
            continue
        covered: Counter = Counter()
        for x in lp_tx:
            covered[x] += 1
            covered.update(region_members(scenario, x, r_b))
            for y in region_members(scenario, x, 2 * r_b):
                if y in tx or not scenario.node(y).awake_at(outcome.slot):
                    continue
                a1_checks += 1
                if not sinr_decodes(y, x, tx, scenario):
                    a1_violations += 1
                    logger.error(f"Slot {outcome.slot}: node {y} in 2B_{x} missed a LowPower transmission")
        for y, count in covered.items():
            if not scenario.node(y).awake_at(outcome.slot):
                continue
            disjoint_checks += 1
            disjoint_violations += count > 1
    return SlotScan(
        trace.slots_run, a1_checks, a1_violations, disjoint_checks, disjoint_violations, trace.timed_out
    )


def corpus_specs(corpus_n: Sequence[int]) -> List[GeneratorSpec]:
    specs = []
    for n in corpus_n:
        specs.append(GeneratorSpec(kind="uniform_square", n=n))
        specs.append(GeneratorSpec(kind="clustered", n=n, clusters=max(1, n // CORPUS_CLUSTER)))
    return specs


def corpus_trial(job: Tuple[GeneratorSpec, Variant, int, Optional[int]]) -> TrialSummary:
    spec, variant, seed, max_slots = job
    scenario = generate_scenario(spec.model_copy(update={"seed": seed}))
    return summarize(run(scenario, variant, seed, max_slots, record_outcomes=False), scenario)


class VerifyRunner:
    """Runs suites, sharing the simulated corpora between suites that need them."""

    def __init__(self, options: VerifyOptions):
        self.options = options
        self._scans: Optional[List[SlotScan]] = None
        self._corpus: Optional[List[TrialSummary]] = None

    def scans(self) -> List[SlotScan]:
        if self._scans is None:
            o = self.options
            jobs = [(o.n, o.seed + k, o.max_slots) for k in range(o.trials)]
            logger.info(f"Slot scan: {len(jobs)} trials at n={o.n}")
            self._scans = parallel_map(scan_trial, jobs, o.workers)
        return self._scans

    def corpus(self) -> List[TrialSummary]:
        if self._corpus is None:
            o = self.options
            jobs = [
                (spec, variant, o.seed + k, o.max_slots)
                for variant in (Variant.ALG1, Variant.ALG2)
                for spec in corpus_specs(o.corpus_n)
                for k in range(o.trials)
            ]
            logger.info(f"Corpus: {len(jobs)} trials over n in {list(o.corpus_n)}")
            self._corpus = parallel_map(corpus_trial, jobs, o.workers)
        return self._corpus

    def corpus_rows(self, variant: Optional[Variant] = None) -> List[NodeSummary]:
        return [
            row
            for summary in self.corpus()
            if variant is None or summary.variant is variant
            for row in summary.nodes
        ]

    def corpus_timeouts(self, variant: Optional[Variant] = None) -> int:
        """Corpus trials that hit the slot cap; each one fails the corpus suites."""
        return sum(
            summary.timed_out
            for summary in self.corpus()
            if variant is None or summary.variant is variant
        )

    def lemma_a1(self) -> SuiteResult:
        scans = self.scans()
        timed_out = sum(s.timed_out for s in scans)
        violations = sum(s.a1_violations for s in scans) + timed_out
        return SuiteResult(
            name="lemma-a1",
            passed=violations == 0,
            checked=sum(s.a1_checks for s in scans),
            violations=violations,
            details={"slots": sum(s.slots for s in scans), "timed_out": timed_out},
        )

    def disjoint(self) -> SuiteResult:
        scans = self.scans()
        timed_out = sum(s.timed_out for s in scans)
        violations = sum(s.disjoint_violations for s in scans) + timed_out
        return SuiteResult(
            name="disjoint",
            passed=violations == 0,
            checked=sum(s.disjoint_checks for s in scans),
            violations=violations,
            details={"timed_out": timed_out},
        )

    def mass(self) -> SuiteResult:
        corpus = self.corpus()
        timed_out = self.corpus_timeouts()
        violations = sum(summary.mass_violations for summary in corpus) + timed_out
        return SuiteResult(
            name="mass",
            passed=violations == 0,
            checked=sum(summary.slots_run for summary in corpus),
            violations=violations,
            details={"max_mass": max((s.max_mass for s in corpus), default=0.0), "timed_out": timed_out},
        )

    def success_halt(self) -> SuiteResult:
        alg1 = success_stats(self.corpus_rows(Variant.ALG1))
        alg2 = success_stats(self.corpus_rows(Variant.ALG2))
        timed_out = self.corpus_timeouts()
        lp_missing = alg2.lp_halts - alg2.lp_with_success
        passed = alg1.budget_fraction >= MIN_BUDGET_SUCCESS and lp_missing == 0 and timed_out == 0
        return SuiteResult(
            name="success-halt",
            passed=passed,
            checked=alg1.budget_halts + alg2.lp_halts,
            violations=(alg1.budget_halts - alg1.budget_with_success) + lp_missing + timed_out,
            details={
                "alg1_budget_fraction": alg1.budget_fraction,
                "alg2_lp_halts": alg2.lp_halts,
                "alg2_budget_fraction": alg2.budget_fraction,
                "timed_out": timed_out,
            },
        )

    def tx_counts(self) -> SuiteResult:
        stats = transmission_stats(self.corpus_rows())
        timed_out = self.corpus_timeouts()
        return SuiteResult(
            name="tx-counts",
            passed=stats.outside_hard == 0 and stats.inside_fraction >= MIN_TX_INSIDE and timed_out == 0,
            checked=stats.nodes,
            violations=stats.outside_hard + timed_out,
            details={"inside_fraction": stats.inside_fraction, "timed_out": timed_out},
        )

    def calculus(self) -> SuiteResult:
        calculus = calculus_claim_check()
        peak = peak_single_tx_check()
        sweep = range_sweep_check(256)
        aggregate = [
            aggregate_bound_check(RangePartition.for_n(n), seed=self.options.seed)
            for n in (256, self.options.chain_n)
        ]
        violations = (
            calculus.violations
            + peak.violations
            + sweep.violations
            + sum(a.violations for a in aggregate)
        )
        return SuiteResult(
            name="calculus",
            passed=violations == 0,
            checked=calculus.points + peak.points + sweep.points + sum(a.vectors for a in aggregate),
            violations=violations,
            details={
                "calculus_worst": calculus.worst,
                "peak_worst": peak.worst,
                "range_sweep_margin": sweep.worst,
                "aggregate_worst_ratio": max(a.worst_ratio for a in aggregate),
                # the capped argmin is reported, not enforced
                "aggregate_capped_violations": sum(a.capped_violations for a in aggregate),
                "cover_constant": cover_constant(PhysParams()),
            },
        )

    def chain(self) -> SuiteResult:
        check = chain_check(self.options.chain_n, trials=self.options.mc_trials, seed=self.options.seed)
        details = {
            "t": check.t,
            "j": check.j,
            "delta": check.delta,
            "exact": check.exact,
            "weight_bound": check.weight_bound,
            "floor": check.floor,
            "matched_p": check.matched_p,
            "matched_exact": check.matched_exact,
            "matched_weight_bound": check.matched_weight_bound,
        }
        if check.empirical is not None:
            details["empirical"] = check.empirical
            details["sigma"] = check.sigma
            details["matched_excess"] = check.matched_excess
        return SuiteResult(
            name="chain",
            passed=check.holds,
            checked=1,
            violations=int(not check.holds),
            details=details,
        )

    def suite(self, name: str) -> Callable[[], SuiteResult]:
        return {
            "lemma-a1": self.lemma_a1,
            "mass": self.mass,
            "disjoint": self.disjoint,
            "success-halt": self.success_halt,
            "tx-counts": self.tx_counts,
            "calculus": self.calculus,
            "chain": self.chain,
        }[name]


def run_suites(names: Sequence[str], options: VerifyOptions) -> List[SuiteResult]:
    """
    Run the named suites ("all" expands to every suite) in a fixed order.

    Raises:
        LocalcastError: On an unknown suite name
    """
    if "all" in names:
        names = SUITES
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise LocalcastError(f"Unknown verify suites: {', '.join(unknown)}")
    runner = VerifyRunner(options)
    results = []
    for name in SUITES:
        if name not in names:
            continue
        result = runner.suite(name)()
        if result.passed:
            logger.info(f"Suite {name}: passed ({result.checked} checks)")
        else:
            logger.error(f"Suite {name}: FAILED with {result.violations} violations")
        results.append(result)
    return results

