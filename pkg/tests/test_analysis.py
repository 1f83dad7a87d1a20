import math
import random

import pytest

from src.localcast.core.config import settings
from src.localcast.core.exceptions import AnalysisError
from src.localcast.models.node_state import HaltReason, Variant
from src.localcast.schemas.trace import NodeSummary
from src.localcast.services.analysis import (
    BoundForm,
    doubling_ratios,
    fallback_ratio,
    fallback_stats,
    fit_bound,
    median_cells,
    success_stats,
    transmission_stats,
)


def row(n, n_x, active, **fields):
    return NodeSummary(node_id=fields.pop("node_id", 0), n=n, N_x=n_x, wake=0, halt=active, **fields)


def synthetic_rows(a=3, b=7):
    rows = []
    for n in (256, 1024):
        log_n = math.log2(n)
        for n_x in (4, 8, 16, 32, 64):
            active = round(a * n_x * log_n + b * log_n**2)
            rows.append(row(n, n_x, active))
    return rows


def test_fit_recovers_coefficients():
    report = fit_bound(synthetic_rows(), BoundForm.NLOGN_PLUS_LOG2)
    assert report.a == pytest.approx(3, abs=1e-9)
    assert report.b == pytest.approx(7, abs=1e-9)
    assert report.residual == pytest.approx(0, abs=1e-9)
    assert len(report.cells) == 10


def test_fit_accepts_form_string():
    report = fit_bound(synthetic_rows(), "N_plus_log2")
    assert report.form == "N_plus_log2"


def test_true_form_fits_better():
    rows = synthetic_rows()
    right = fit_bound(rows, BoundForm.NLOGN_PLUS_LOG2)
    wrong = fit_bound(rows, BoundForm.N_PLUS_LOG2)
    assert right.residual < wrong.residual


def test_fit_is_permutation_invariant():
    rows = synthetic_rows()
    shuffled = rows[:]
    random.Random(4).shuffle(shuffled)
    assert fit_bound(shuffled, BoundForm.N_PLUS_LOG2) == fit_bound(rows, BoundForm.N_PLUS_LOG2)


def test_single_n_x_is_degenerate():
    rows = [row(256, 8, 100 + k) for k in range(12)]
    with pytest.raises(AnalysisError):
        fit_bound(rows, BoundForm.N_PLUS_LOG2)


def test_too_few_rows():
    with pytest.raises(AnalysisError):
        fit_bound(synthetic_rows()[:5], BoundForm.N_PLUS_LOG2)


def test_unhalted_rows_are_ignored():
    rows = synthetic_rows() + [NodeSummary(node_id=1, n=256, N_x=4, wake=0)]
    assert fit_bound(rows, BoundForm.NLOGN_PLUS_LOG2).a == pytest.approx(3, abs=1e-9)


def test_median_cells():
    cells = median_cells([row(256, 8, 10), row(256, 8, 30), row(256, 8, 20), row(256, 16, 5)])
    assert [(c.N_x, c.median_active_slots, c.count) for c in cells] == [(8, 20.0, 3), (16, 5.0, 1)]


def test_isolated_node_has_no_fallbacks():
    isolated = row(256, 1, 100, fallbacks=0)
    assert fallback_ratio(isolated) == 0.0


def test_fallback_ratios():
    alg1 = row(256, 8, 100, fallbacks=16)
    alg2 = row(256, 8, 100, fallbacks=2, variant=Variant.ALG2)
    assert fallback_ratio(alg1) == pytest.approx(2.0)
    assert fallback_ratio(alg2) == pytest.approx(2 * 8 / 16)
    stats = fallback_stats([alg1, alg2])
    assert stats[Variant.ALG1].holds
    assert not fallback_stats([alg1], c=1.0)[Variant.ALG1].holds


def test_clique_fallbacks_within_default_limit():
    # a 32-node clique at n_bound 64 under alg1 reaches k = 202
    clique = row(64, 32, 62308, fallbacks=202)
    stats = fallback_stats([clique])[Variant.ALG1]
    assert stats.max_ratio == pytest.approx(202 / 32)
    assert stats.limit == settings.FALLBACK_RATIO_ALG1
    assert stats.holds


def test_transmission_stats():
    # gamma log n = 64 at n = 256
    rows = [
        row(256, 4, 100, reason=HaltReason.BUDGET, transmissions=64),
        row(256, 4, 100, reason=HaltReason.BUDGET, transmissions=30),
        row(256, 4, 100, reason=HaltReason.BUDGET, transmissions=129),
        row(256, 4, 100, reason=HaltReason.LOW_POWER_SUCCESS, transmissions=1),
    ]
    stats = transmission_stats(rows)
    assert stats.nodes == 3
    assert stats.outside_hard == 1
    assert stats.strictly_inside == 1


def test_success_stats():
    rows = [
        row(256, 4, 100, reason=HaltReason.BUDGET, first_success=50),
        row(256, 4, 100, reason=HaltReason.BUDGET),
        row(256, 4, 100, reason=HaltReason.LOW_POWER_SUCCESS, first_success=100),
    ]
    stats = success_stats(rows)
    assert stats.budget_fraction == pytest.approx(0.5)
    assert stats.lp_halts == stats.lp_with_success == 1


def test_doubling_ratios():
    cells = median_cells([row(256, n_x, 10 * n_x) for n_x in (16, 32, 64, 128)])
    assert doubling_ratios(cells) == [(32, 2.0), (64, 2.0)]
