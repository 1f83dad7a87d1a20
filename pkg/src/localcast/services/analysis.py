import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.localcast.core.config import logger, settings
from src.localcast.core.exceptions import AnalysisError
from src.localcast.models.node_state import HaltReason, Variant
from src.localcast.schemas.experiment import FitCell, FitReport
from src.localcast.schemas.trace import NodeSummary

MIN_ROWS = 10
MIN_DISTINCT_NX = 4


class BoundForm(str, Enum):
    # a * N_x * log n + b * log^2 n
    NLOGN_PLUS_LOG2 = "NlogN_plus_log2"
    # a * N_x + b * log^2 n
    N_PLUS_LOG2 = "N_plus_log2"


def _design_row(form: BoundForm, n: int, n_x: float) -> Tuple[float, float]:
    log_n = math.log2(n)
    first = n_x * log_n if form is BoundForm.NLOGN_PLUS_LOG2 else n_x
    return first, log_n**2


def median_cells(rows: Sequence[NodeSummary]) -> List[FitCell]:
    """Median active time per (n, N_x) cell over rows that halted."""
    cells: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for row in rows:
        if row.active_slots is not None:
            cells[(row.n, row.N_x)].append(row.active_slots)
    return [
        FitCell(n=n, N_x=n_x, median_active_slots=float(np.median(values)), count=len(values))
        for (n, n_x), values in sorted(cells.items())
    ]


def fit_bound(rows: Sequence[NodeSummary], form: BoundForm) -> FitReport:
    """
    Least-squares fit of median active time against a running-time form.

    Args:
        rows: Per-node summaries; rows that never halted are ignored
        form: Which bound shape to fit

    Returns:
        Coefficients (a, b), normalized RMS residual and the fitted cells

    Raises:
        AnalysisError: If there are too few rows, too few distinct N_x values,
            or the design matrix is rank deficient
    """
    form = BoundForm(form)
    usable = [row for row in rows if row.active_slots is not None]
    if len(usable) < MIN_ROWS:
        raise AnalysisError(f"Need at least {MIN_ROWS} halted rows, got {len(usable)}")
    if len({row.N_x for row in usable}) < MIN_DISTINCT_NX:
        raise AnalysisError(f"Need at least {MIN_DISTINCT_NX} distinct N_x values")

    cells = median_cells(usable)
    design = np.array([_design_row(form, cell.n, cell.N_x) for cell in cells])
    target = np.array([cell.median_active_slots for cell in cells])
    if np.linalg.matrix_rank(design) < 2:
        raise AnalysisError("Degenerate design matrix")

    coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
    residuals = target - design @ coefficients
    scale = float(np.mean(np.abs(target))) or 1.0
    residual = float(np.sqrt(np.mean(residuals**2)) / scale)
    a, b = (float(c) for c in coefficients)
    logger.info(f"Fit {form.value}: a={a:.4f}, b={b:.4f}, residual={residual:.4f}")
    return FitReport(form=form.value, a=a, b=b, residual=residual, cells=cells)


@dataclass(frozen=True)
class FallbackStats:
    variant: Variant
    max_ratio: float
    limit: float
    nodes: int

    @property
    def holds(self) -> bool:
        return self.max_ratio <= self.limit


def fallback_ratio(row: NodeSummary) -> float:
    """k / N_x for LocalBroadcast1, k log n / (N_x + log n) for LocalBroadcast2."""
    log_n = math.log2(row.n)
    if row.variant is Variant.ALG2:
        return row.fallbacks * log_n / (row.N_x + log_n)
    return row.fallbacks / row.N_x


def fallback_stats(rows: Sequence[NodeSummary], c: Optional[float] = None) -> Dict[Variant, FallbackStats]:
    """Largest FallBack ratio per variant over rows that halted."""
    by_variant: Dict[Variant, List[float]] = defaultdict(list)
    for row in rows:
        if row.halt is not None:
            by_variant[row.variant].append(fallback_ratio(row))
    limits = {
        Variant.ALG1: settings.FALLBACK_RATIO_ALG1,
        Variant.ALG2: settings.FALLBACK_RATIO_ALG2,
    }
    return {
        variant: FallbackStats(
            variant=variant,
            max_ratio=max(ratios),
            limit=c if c is not None else limits[variant],
            nodes=len(ratios),
        )
        for variant, ratios in by_variant.items()
    }


@dataclass(frozen=True)
class TransmissionStats:
    nodes: int
    outside_hard: int
    strictly_inside: int

    @property
    def inside_fraction(self) -> float:
        return self.strictly_inside / self.nodes if self.nodes else 1.0


def transmission_stats(rows: Sequence[NodeSummary]) -> TransmissionStats:
    """
    Transmission counts of Budget-halting nodes against [g/2, 2g], g = gamma log n.

    The hard window widens the lower end by 3 sqrt(g).
    """
    nodes = outside = inside = 0
    for row in rows:
        if row.reason is not HaltReason.BUDGET:
            continue
        g = row.gamma * max(1, math.ceil(math.log2(row.n)))
        nodes += 1
        if not g / 2 - 3 * math.sqrt(g) <= row.transmissions <= 2 * g:
            outside += 1
        if g / 2 < row.transmissions < 2 * g:
            inside += 1
    return TransmissionStats(nodes=nodes, outside_hard=outside, strictly_inside=inside)


@dataclass(frozen=True)
class SuccessStats:
    budget_halts: int
    budget_with_success: int
    lp_halts: int
    lp_with_success: int

    @property
    def budget_fraction(self) -> float:
        return self.budget_with_success / self.budget_halts if self.budget_halts else 1.0


def success_stats(rows: Sequence[NodeSummary]) -> SuccessStats:
    """How many halting nodes had broadcast successfully by their halt slot."""
    budget = budget_ok = lp = lp_ok = 0
    for row in rows:
        succeeded = row.first_success is not None and row.halt is not None and row.first_success <= row.halt
        if row.reason is HaltReason.BUDGET:
            budget += 1
            budget_ok += succeeded
        elif row.reason is HaltReason.LOW_POWER_SUCCESS:
            lp += 1
            lp_ok += succeeded
    return SuccessStats(budget, budget_ok, lp, lp_ok)


def doubling_ratios(cells: Sequence[FitCell], min_n_x: int = 32) -> List[Tuple[int, float]]:
    """T(2N)/T(N) for consecutive cluster sizes, N >= min_n_x."""
    by_n_x = {cell.N_x: cell.median_active_slots for cell in cells}
    return [
        (n_x, by_n_x[2 * n_x] / by_n_x[n_x])
        for n_x in sorted(by_n_x)
        if n_x >= min_n_x and 2 * n_x in by_n_x and by_n_x[n_x] > 0
    ]
