"""
Lower-bound harness for input-determined algorithms under the protocol model.

Two transmission regions, one dense (Delta nodes) and one sparse, sit inside
each other's interference range. While no slot has had exactly one
transmitter, every reception history is all zeros, so all nodes draw iid
with a common probability p_t and P(N_t | N_{t-1}) has a closed form.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist, pdist

from src.localcast.core.config import logger, settings
from src.localcast.core.exceptions import LowerBoundError
from src.localcast.models.node_state import NodeState, SlotFeedback, Variant
from src.localcast.schemas.scenario import (
    AlgoConsts,
    NodeSpec,
    PhysParams,
    ProtocolModel,
    ProtocolRadii,
    Scenario,
)
from src.localcast.services.localcast import (
    decide_transmit,
    effective_p,
    new_node_state,
    observe,
)
from src.localcast.services.rng import trial_generator

DEFAULT_SPARSE = 3
TWO_OVER_E = 2 / math.e
GOLDEN_ANGLE = math.pi * (3 - math.sqrt(5))


class InputDeterminedPolicy(Protocol):
    """Transmit probability as a pure function of the reception history."""

    def next_p(self, history: str, t: int, n_bound: int) -> float: ...


@dataclass(frozen=True)
class FixedPolicy:
    p: float

    def next_p(self, history: str, t: int, n_bound: int) -> float:
        return self.p


@dataclass(frozen=True)
class ScheduledPolicy:
    """p_t read from a fixed schedule (1-based t), repeating the last entry."""

    schedule: Tuple[float, ...]

    def next_p(self, history: str, t: int, n_bound: int) -> float:
        return self.schedule[min(t, len(self.schedule)) - 1]


class _NeverFires:
    def random(self) -> float:
        return 1.0


class LocalBroadcast1Policy:
    """
    LocalBroadcast1 as an input-determined policy.

    The automaton's state depends only on the reception bits (tp grows by p
    whether or not the node transmits), so replaying the history through it
    yields the probability of transmitting in slot t. Halted nodes return 0.
    """

    def __init__(self, delta: int = settings.DEFAULT_DELTA, gamma: float = settings.DEFAULT_GAMMA):
        self.delta = delta
        self.gamma = gamma
        self._cache: Dict[int, Tuple[str, NodeState]] = {}

    def next_p(self, history: str, t: int, n_bound: int) -> float:
        cached_history, state = self._cache.get(n_bound, ("", None))
        if state is None or not history.startswith(cached_history):
            consts = AlgoConsts(delta=self.delta, gamma=self.gamma, n_bound=n_bound)
            cached_history, state = "", new_node_state(Variant.ALG1, consts)
        for bit in history[len(cached_history):]:
            if state.halted:
                break
            decide_transmit(state, _NeverFires())
            observe(state, SlotFeedback(decoded=bit == "1"))
        self._cache[n_bound] = (history, state)
        return 0.0 if state.halted else effective_p(state)


def parse_policy(spec: str, n: int, sparse: int = DEFAULT_SPARSE) -> InputDeterminedPolicy:
    """
    Build a policy from its CLI spelling.

    fixed:auto uses p = 1/Delta for the instance sized at the largest
    allowed range index; fixed:<p> a constant; alg1[:delta:gamma] the
    LocalBroadcast1 automaton.
    """
    kind, _, arg = spec.partition(":")
    if kind == "fixed":
        if arg == "auto":
            return FixedPolicy(1 / delta_from_j(n, j_cap_for(n)))
        try:
            p = float(arg)
        except ValueError:
            raise LowerBoundError(f"Bad fixed policy probability: {arg!r}")
        if not 0 <= p <= 1:
            raise LowerBoundError(f"Policy probability {p} outside [0, 1]")
        return FixedPolicy(p)
    if kind == "alg1":
        if not arg:
            return LocalBroadcast1Policy()
        delta, _, gamma = arg.partition(":")
        try:
            return LocalBroadcast1Policy(int(delta), float(gamma or settings.DEFAULT_GAMMA))
        except ValueError:
            raise LowerBoundError(f"Bad alg1 policy constants: {arg!r}")
    raise LowerBoundError(f"Unknown policy: {spec!r}")


@dataclass
class TwoRegionInstance:
    dense_count: int
    sparse_count: int
    r_t: float
    r_i: float
    separation: float
    dense: np.ndarray
    sparse: np.ndarray

    @property
    def m(self) -> int:
        return self.dense_count + self.sparse_count

    def positions(self) -> np.ndarray:
        return np.vstack([self.dense, self.sparse])

    def to_scenario(self, n_bound: Optional[int] = None) -> Scenario:
        """The instance as a protocol-model scenario, dense nodes first; n_bound is raised to m if needed."""
        return Scenario(
            phys=PhysParams(),
            model=ProtocolModel(protocol=ProtocolRadii(r_t=self.r_t, r_i=self.r_i)),
            n_bound=max(n_bound or 0, self.m),
            nodes=[
                NodeSpec(id=i, x=float(x), y=float(y))
                for i, (x, y) in enumerate(self.positions())
            ],
        )


def _sunflower(count: int, radius: float, centre: Tuple[float, float]) -> np.ndarray:
    k = np.arange(count)
    rho = radius * np.sqrt((k + 0.5) / count)
    theta = k * GOLDEN_ANGLE
    return np.column_stack([centre[0] + rho * np.cos(theta), centre[1] + rho * np.sin(theta)])


def build_two_region_instance(
    delta: int,
    sparse: int = DEFAULT_SPARSE,
    r_t: float = 1.0,
    r_i: float = 4.0,
    separation: Optional[float] = None,
) -> TwoRegionInstance:
    """
    Place a dense and a sparse transmission region in mutual interference range.

    Each region fills a disc of radius r_t/4; the discs are `separation`
    apart (default (r_t + r_i)/2), so cross-region distances fall in
    (r_t, r_i] while same-region distances stay within r_t.

    Raises:
        LowerBoundError: If the counts are not positive or the radii leave no room
    """
    if delta < 1 or sparse < 1:
        raise LowerBoundError("Both regions need at least one node")
    if r_t <= 0 or r_i <= 2 * r_t:
        raise LowerBoundError(f"Infeasible radii r_t={r_t}, r_i={r_i}: need r_i > 2 r_t")
    if separation is None:
        separation = (r_t + r_i) / 2
    if not 1.5 * r_t < separation <= r_i - 0.5 * r_t:
        raise LowerBoundError(f"Separation {separation} outside (1.5 r_t, r_i - 0.5 r_t]")

    disc = r_t / 4
    instance = TwoRegionInstance(
        dense_count=delta,
        sparse_count=sparse,
        r_t=r_t,
        r_i=r_i,
        separation=separation,
        dense=_sunflower(delta, disc, (0.0, 0.0)),
        sparse=_sunflower(sparse, disc, (separation, 0.0)),
    )
    _validate_instance(instance)
    return instance


def _validate_instance(instance: TwoRegionInstance) -> None:
    r_t, r_i = instance.r_t, instance.r_i
    # a disc of radius r_t/2 has diameter r_t, which bounds every dense pair
    centre = instance.dense.mean(axis=0)
    if np.max(np.linalg.norm(instance.dense - centre, axis=1)) > r_t / 2:
        raise LowerBoundError("Dense region exceeds one transmission range")
    if instance.sparse_count > 1 and np.max(pdist(instance.sparse)) > r_t:
        raise LowerBoundError("Sparse region exceeds one transmission range")
    cross = cdist(instance.dense, instance.sparse)
    if np.min(cross) <= r_t or np.max(cross) > r_i:
        raise LowerBoundError("Cross-region distances must lie in (r_t, r_i]")


@dataclass(frozen=True)
class RangePartition:
    """
    Probability ranges R_0 = (-inf, 16/n^2), R_j = [16^j/n^2, 16^(j+1)/n^2).

    r is the smallest index whose range reaches past 1.
    """

    n: int
    r: int
    bounds: Tuple[float, ...] = field(repr=False)

    @classmethod
    def for_n(cls, n: int) -> "RangePartition":
        if n < 2:
            raise LowerBoundError("Partition needs n >= 2")
        r = 0
        while 16 ** (r + 1) <= n * n:
            r += 1
        bounds = tuple(16**k / (n * n) for k in range(1, r + 2))
        return cls(n=n, r=r, bounds=bounds)

    @property
    def size(self) -> int:
        return self.r + 1

    def index_of(self, p: float) -> int:
        i = int(np.searchsorted(self.bounds, p, side="right"))
        if i > self.r:
            raise LowerBoundError(f"Probability {p} lies above the last range")
        return i

    def representative(self, i: int) -> float:
        """A probability inside R_i, capped at 1."""
        low = self.bounds[i - 1] if i > 0 else self.bounds[0] / 16
        return min(1.0, low * 4)


def exact_single_tx_prob(m: int, p: float) -> float:
    """Probability that exactly one of m iid Bernoulli(p) nodes transmits."""
    if m < 1 or not 0 <= p <= 1:
        raise LowerBoundError(f"Need m >= 1 and p in [0, 1], got m={m}, p={p}")
    if m == 1:
        return p
    return m * p * (1 - p) ** (m - 1)


def weights(p_seq: Sequence[float], partition: RangePartition) -> List[float]:
    """Fraction of the sequence falling in each range."""
    if not len(p_seq):
        raise LowerBoundError("Empty probability sequence")
    counts = np.zeros(partition.size)
    for p in p_seq:
        counts[partition.index_of(p)] += 1
    return (counts / len(p_seq)).tolist()


def f_weight(i: int, j: int) -> float:
    return TWO_OVER_E ** (abs(i - j) + 1)


def weighted_score(w: Sequence[float], j: int) -> float:
    return sum(f_weight(i, j) * wi for i, wi in enumerate(w))


def select_j(
    w: Sequence[float], partition: RangePartition, j_cap: int
) -> Tuple[int, float]:
    """
    Range index in [0, j_cap] minimising sum_i f(i, j) w_i.

    Ties resolve to the smallest index.
    """
    if j_cap < 0:
        raise LowerBoundError("j_cap must be non-negative")
    cap = min(j_cap, partition.r)
    scores = [weighted_score(w, j) for j in range(cap + 1)]
    j = int(np.argmin(scores))
    return j, float(scores[j])


def j_cap_for(n: int) -> int:
    return int(math.log2(n)) // 4


def delta_from_j(n: int, j: int) -> int:
    """Dense-region size Delta = 1/P_j with P_j = 4 * 16^j / n^2."""
    if n < 2 or j < 0:
        raise LowerBoundError(f"Need n >= 2 and j >= 0, got n={n}, j={j}")
    delta = round(n * n / (4 * 16**j))
    if delta < 1:
        raise LowerBoundError(f"Delta rounds to {delta} for n={n}, j={j}")
    return delta


@dataclass(frozen=True)
class BoundCheck:
    exact: float
    bound: float
    holds: bool


def per_slot_bound_check(
    p_t: float, i: int, j: int, delta: int, sparse: int = DEFAULT_SPARSE
) -> BoundCheck:
    """Compare the exact P(N_t | N_{t-1}) with the 1 - f(i, j) lower bound."""
    exact = 1 - exact_single_tx_prob(delta + sparse, p_t)
    bound = 1 - f_weight(i, j)
    return BoundCheck(exact=float(exact), bound=bound, holds=bool(exact >= bound))


@dataclass(frozen=True)
class NtRecord:
    t: int
    p_t: float
    exact_cond: float
    exact: float
    empirical_cond: Optional[float]
    empirical: Optional[float]


def policy_sequence(policy: InputDeterminedPolicy, t_max: int, n_bound: int) -> List[float]:
    """p_1..p_t_max along the all-zero reception history."""
    return [policy.next_p("0" * (t - 1), t, n_bound) for t in range(1, t_max + 1)]


def run_nt_experiment(
    instance: TwoRegionInstance,
    policy: InputDeterminedPolicy,
    t_max: int,
    trials: int,
    seed: int,
    n_bound: Optional[int] = None,
) -> List[NtRecord]:
    """
    Track the event that no slot so far had exactly one transmitter.

    Exact values chain 1 - m p_t (1-p_t)^(m-1); the Monte Carlo side draws
    the transmitter count of every surviving trial each slot.
    """
    m = instance.m
    n_bound = n_bound or m
    p_seq = policy_sequence(policy, t_max, n_bound)
    rng = trial_generator(seed, 0x1B)
    alive = trials
    cumulative = 1.0
    records = []
    for t, p_t in enumerate(p_seq, start=1):
        cond = 1 - exact_single_tx_prob(m, p_t)
        cumulative *= cond
        empirical_cond = empirical = None
        if trials > 0:
            before = alive
            if alive:
                counts = rng.binomial(m, p_t, size=alive)
                alive = int(np.count_nonzero(counts != 1))
            empirical_cond = alive / before if before else None
            empirical = alive / trials
        records.append(
            NtRecord(
                t=t,
                p_t=p_t,
                exact_cond=cond,
                exact=cumulative,
                empirical_cond=empirical_cond,
                empirical=empirical,
            )
        )
    return records


@dataclass
class BoundRow:
    t: int
    p_t: float
    range_i: int
    exact_cond_prob: float
    bound: float
    holds: bool
    cumulative_exact: float
    cumulative_bound: float


@dataclass
class LowerBoundReport:
    n: int
    j: int
    score: float
    j_unconstrained: int
    score_unconstrained: float
    delta: int
    sparse: int
    weights: List[float]
    rows: List[BoundRow]

    @property
    def all_hold(self) -> bool:
        return all(row.holds for row in self.rows)


BOUND_COLUMNS = [
    "t",
    "p_t",
    "range_i",
    "exact_cond_prob",
    "bound",
    "holds",
    "cumulative_exact",
    "cumulative_bound",
]


def bound_table(
    n: int,
    policy: InputDeterminedPolicy,
    t_max: int,
    sparse: int = DEFAULT_SPARSE,
    j_cap: Optional[int] = None,
) -> LowerBoundReport:
    """
    Per-slot exact conditional probabilities against their bounds.

    The range index j is chosen adversarially from the policy's weights,
    Delta follows from j, and every slot is checked.
    """
    partition = RangePartition.for_n(n)
    p_seq = policy_sequence(policy, t_max, n)
    w = weights(p_seq, partition)
    cap = j_cap_for(n) if j_cap is None else j_cap
    j, score = select_j(w, partition, cap)
    j_free, score_free = select_j(w, partition, partition.r)
    delta = delta_from_j(n, j)

    rows = []
    cumulative_exact = cumulative_bound = 1.0
    for t, p_t in enumerate(p_seq, start=1):
        i = partition.index_of(p_t)
        check = per_slot_bound_check(p_t, i, j, delta, sparse)
        cumulative_exact *= check.exact
        cumulative_bound *= check.bound
        rows.append(
            BoundRow(
                t=t,
                p_t=p_t,
                range_i=i,
                exact_cond_prob=check.exact,
                bound=check.bound,
                holds=check.holds,
                cumulative_exact=cumulative_exact,
                cumulative_bound=cumulative_bound,
            )
        )
    report = LowerBoundReport(
        n=n,
        j=j,
        score=score,
        j_unconstrained=j_free,
        score_unconstrained=score_free,
        delta=delta,
        sparse=sparse,
        weights=w,
        rows=rows,
    )
    logger.info(
        f"Lower bound n={n}: j={j} (unconstrained {j_free}), Delta={delta}, "
        f"score={score:.4f}, all bounds hold={report.all_hold}"
    )
    return report


@dataclass(frozen=True)
class GridCheck:
    points: int
    violations: int
    worst: float


def calculus_claim_check(points: int = 10**5) -> GridCheck:
    """1 - x >= 16^(-x) on [0, 2/e]; worst is the largest 16^(-x) - (1 - x)."""
    x = np.linspace(0.0, TWO_OVER_E, points)
    gap = 16.0 ** (-x) - (1 - x)
    # x = 0 is an equality; allow for rounding only
    violations = int(np.count_nonzero(gap > 1e-12))
    return GridCheck(points=points, violations=violations, worst=float(gap.max()))


def peak_single_tx_check(m_values: Optional[Sequence[int]] = None) -> GridCheck:
    """m p (1-p)^(m-1) at its maximiser p = 1/m never exceeds 2/e."""
    if m_values is None:
        m_values = np.unique(np.rint(np.logspace(math.log10(2), 6, 2000)).astype(np.int64))
    m = np.asarray(m_values, dtype=np.float64)
    peak = (1 - 1 / m) ** (m - 1)
    return GridCheck(
        points=len(m),
        violations=int(np.count_nonzero(peak > TWO_OVER_E)),
        worst=float(peak.max()),
    )


@dataclass(frozen=True)
class AggregateCheck:
    vectors: int
    violations: int
    capped_violations: int
    worst_ratio: float


def aggregate_bound_check(
    partition: RangePartition,
    vectors: int = 1000,
    seed: int = 0,
    c: float = settings.AGGREGATE_BOUND_C,
    j_cap: Optional[int] = None,
) -> AggregateCheck:
    """
    min_j sum_i f(i, j) w_i <= C/(r+1) for random and adversarial weights.

    Adversarial vectors are point masses and two-point masses; the capped
    argmin (j <= j_cap) is reported separately since the cap is not covered
    by the averaging argument.
    """
    size = partition.size
    cap = j_cap_for(partition.n) if j_cap is None else j_cap
    limit = c / size
    rng = trial_generator(seed, 0xA7)
    candidates = [np.full(size, 1 / size)]
    candidates += [np.eye(size)[i] for i in range(size)]
    candidates += [(np.eye(size)[i] + np.eye(size)[k]) / 2 for i in range(size) for k in range(i + 1, size)]
    candidates += list(rng.dirichlet(np.ones(size), size=vectors))
    candidates += list(rng.dirichlet(np.full(size, 0.1), size=vectors))

    violations = capped = 0
    worst = 0.0
    for w in candidates:
        _, score = select_j(w, partition, partition.r)
        _, capped_score = select_j(w, partition, cap)
        worst = max(worst, float(score / limit))
        violations += int(score > limit)
        capped += int(capped_score > limit)
    return AggregateCheck(
        vectors=len(candidates),
        violations=violations,
        capped_violations=capped,
        worst_ratio=worst,
    )


@dataclass(frozen=True)
class ChainCheck:
    """
    Chained P(N_t) for the adversarial instance, plus a matched-density case.

    The matched case transmits with p = 1/m on the same m-node instance, so
    a single transmitter is likely every slot and P(N_t) decays geometrically;
    its Monte Carlo comparison runs slot by slot.
    """

    n: int
    t: int
    j: int
    delta: int
    exact: float
    weight_bound: float
    floor: float
    empirical: Optional[float]
    sigma: Optional[float]
    trials: int
    matched_p: float
    matched_exact: float
    matched_weight_bound: float
    # largest per-slot |empirical - exact| beyond its tolerance; <= 0 passes
    matched_excess: Optional[float] = None

    def tolerance(self, p: float) -> float:
        # one trial of slack so a zero-variance exact value still matches
        return settings.MC_SIGMA_TOLERANCE * math.sqrt(max(p * (1 - p), 0.0) / self.trials) + 1 / self.trials

    @property
    def holds(self) -> bool:
        ok = self.exact >= self.weight_bound and self.exact >= self.floor
        ok = ok and self.matched_exact >= self.matched_weight_bound
        if self.empirical is not None:
            ok = ok and abs(self.empirical - self.exact) <= self.tolerance(self.exact)
        if self.matched_excess is not None:
            ok = ok and self.matched_excess <= 0
        return ok


def chain_check(
    n: int = 2**10,
    policy: Optional[InputDeterminedPolicy] = None,
    trials: int = 10**5,
    seed: int = 0,
    sparse: int = DEFAULT_SPARSE,
) -> ChainCheck:
    """
    Chained P(N_t) at t = floor(log2(n)^2 / 4) against its weight bound.

    The weight bound is prod_i (1 - f(i, j))^(w_i t); the floor n^(-1/2)
    stands in for 1/n^o(1) at desk scale. The floor does not apply to the
    matched case, whose P(N_t) is exponentially small by construction.
    """
    t = int(math.log2(n) ** 2 // 4)
    policy = policy or parse_policy("fixed:auto", n, sparse)
    report = bound_table(n, policy, t, sparse)
    exact = report.rows[-1].cumulative_exact
    weight_bound = math.prod(
        (1 - f_weight(i, report.j)) ** (wi * t) for i, wi in enumerate(report.weights)
    )

    m = report.delta + sparse
    matched_p = 1 / m
    matched_range = RangePartition.for_n(n).index_of(matched_p)
    matched_exact = (1 - exact_single_tx_prob(m, matched_p)) ** t
    matched_weight_bound = (1 - f_weight(matched_range, report.j)) ** t

    empirical = sigma = None
    if trials > 0:
        instance = build_two_region_instance(report.delta, sparse)
        records = run_nt_experiment(instance, policy, t, trials, seed, n_bound=n)
        empirical = records[-1].empirical
        sigma = math.sqrt(max(exact * (1 - exact), 0.0) / trials)
        matched = run_nt_experiment(instance, FixedPolicy(matched_p), t, trials, seed + 1, n_bound=n)
    check = ChainCheck(
        n=n,
        t=t,
        j=report.j,
        delta=report.delta,
        exact=exact,
        weight_bound=weight_bound,
        floor=n**-0.5,
        empirical=empirical,
        sigma=sigma,
        trials=trials,
        matched_p=matched_p,
        matched_exact=matched_exact,
        matched_weight_bound=matched_weight_bound,
    )
    if trials > 0:
        matched_excess = max(
            abs(record.empirical - record.exact) - check.tolerance(record.exact) for record in matched
        )
        check = replace(check, matched_excess=float(matched_excess))
    return check


def range_sweep_check(
    n: int, points_per_range: int = 32, sparse: int = DEFAULT_SPARSE
) -> GridCheck:
    """
    Per-slot bound for fixed p spread over every range, against every allowed j.

    Delta is sized from j each time; worst is the smallest exact - bound margin.
    """
    partition = RangePartition.for_n(n)
    lows = [partition.bounds[0] / 16] + list(partition.bounds[:-1])
    grid = []
    for i, low in enumerate(lows):
        high = min(1.0, partition.bounds[i])
        grid += [p for p in np.geomspace(low, high, points_per_range, endpoint=False) if p <= 1]
    grid.append(1.0)

    violations = 0
    worst = math.inf
    for j in range(j_cap_for(n) + 1):
        delta = delta_from_j(n, j)
        for p in grid:
            check = per_slot_bound_check(p, partition.index_of(p), j, delta, sparse)
            worst = min(worst, float(check.exact - check.bound))
            violations += int(not check.holds)
    return GridCheck(points=len(grid), violations=violations, worst=worst)
