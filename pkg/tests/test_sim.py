import pytest

from src.localcast.models.node_state import HaltReason, Variant
from src.localcast.models.outcome import SlotOutcome
from src.localcast.schemas.experiment import GeneratorSpec
from src.localcast.services.scenario_service import generate_scenario
from src.localcast.services.analysis import transmission_stats
from src.localcast.services.sim import default_max_slots, run, run_trials, success_in_slot, summarize
from src.localcast.services.trace_service import file_digest, write_trace_jsonl
from tests.conftest import make_scenario


def outcome(slot=0, transmitters=(), decodes=None):
    return SlotOutcome(
        slot=slot,
        transmitters=frozenset(transmitters),
        decodes=decodes or {},
        rx_power={},
        low_power=frozenset(),
    )


def test_single_node_succeeds_on_first_transmission(single_node):
    trace = run(single_node, Variant.ALG1, seed=3)
    first_tx = next(o.slot for o in trace.outcomes if 0 in o.transmitters)
    assert trace.first_success[0] == first_tx
    assert trace.halt_reason[0] is HaltReason.BUDGET
    assert not trace.timed_out
    assert trace.slots_run == trace.halt_slot[0] + 1


@pytest.mark.parametrize("variant", list(Variant))
def test_far_pair_never_decodes(variant):
    scenario = make_scenario([(0, 0), (10, 0)])
    trace = run(scenario, variant, seed=1)
    assert all(not o.decodes for o in trace.outcomes)
    assert all(trace.first_success[x] is not None for x in (0, 1))
    assert trace.fallback_counts == {0: 0, 1: 0}


def test_close_pair_alg2_halts_on_low_power(close_pair):
    good = 0
    for seed in range(100):
        trace = run(close_pair, Variant.ALG2, seed, record_outcomes=False)
        good += all(
            trace.first_success[x] is not None
            and trace.halt_reason[x] is HaltReason.LOW_POWER_SUCCESS
            for x in (0, 1)
        )
    assert good >= 99


def test_success_in_slot_vacuous(single_node):
    assert success_in_slot(single_node, 0, outcome())


def test_success_in_slot_decoded(close_pair):
    assert success_in_slot(close_pair, 0, outcome(transmitters={0}, decodes={1: 0}))


def test_success_in_slot_receiver_transmitting(close_pair):
    assert not success_in_slot(close_pair, 0, outcome(transmitters={0, 1}))


def test_trace_is_deterministic(tmp_path):
    scenario = generate_scenario(GeneratorSpec(kind="uniform_square", n=24, seed=2))
    digests = []
    for name in ("a.jsonl", "b.jsonl"):
        write_trace_jsonl(run(scenario, Variant.ALG2, seed=9), tmp_path / name)
        digests.append(file_digest(tmp_path / name))
    assert digests[0] == digests[1]


def test_different_seeds_differ():
    scenario = generate_scenario(GeneratorSpec(kind="uniform_square", n=24, seed=2))
    a = run(scenario, Variant.ALG1, seed=1)
    b = run(scenario, Variant.ALG1, seed=2)
    assert [o.transmitters for o in a.outcomes] != [o.transmitters for o in b.outcomes]


def test_max_slots_times_out(single_node):
    trace = run(single_node, Variant.ALG1, seed=0, max_slots=5)
    assert trace.timed_out
    assert trace.slots_run == 5
    assert trace.halt_slot[0] is None


def test_late_waker_starts_at_its_wake_slot():
    scenario = make_scenario([(0, 0), (10, 0)], wakes=[0, 40])
    trace = run(scenario, Variant.ALG1, seed=4)
    assert all(1 not in o.transmitters for o in trace.outcomes[:40])
    summary = summarize(trace, scenario)
    late = next(row for row in summary.nodes if row.node_id == 1)
    assert late.wake == 40
    assert late.active_slots == trace.halt_slot[1] - 40


def test_shutdown_ends_trial():
    scenario = make_scenario([(0, 0)], shutdowns=[10])
    trace = run(scenario, Variant.ALG1, seed=0)
    assert trace.slots_run == 10
    assert not trace.timed_out


def test_no_mass_violations_on_uniform_layout():
    scenario = generate_scenario(GeneratorSpec(kind="uniform_square", n=64, seed=1))
    trace = run(scenario, Variant.ALG1, seed=1, record_outcomes=False)
    assert trace.mass_violations == []
    assert 0 < trace.max_mass <= 0.5


def test_summary_rows():
    scenario = generate_scenario(GeneratorSpec(kind="clustered", n=8, n_bound=16, seed=0))
    summary = summarize(run(scenario, Variant.ALG1, seed=0), scenario)
    assert len(summary.nodes) == 8
    for row in summary.nodes:
        assert row.n == 16
        assert row.N_x == 8
        if row.first_success is not None and row.halt is not None:
            assert row.first_success_slots <= row.active_slots


def test_run_trials_in_seed_order(single_node):
    summaries = run_trials(single_node, Variant.ALG1, [3, 1, 2], workers=1)
    assert [s.seed for s in summaries] == [1, 2, 3]


def test_default_cap_counts_from_last_wake():
    early = make_scenario([(0, 0), (10, 0)])
    late = make_scenario([(0, 0), (10, 0)], wakes=[0, 40])
    assert default_max_slots(late) == default_max_slots(early) + 40


def test_budget_halts_transmit_within_window():
    scenario = generate_scenario(GeneratorSpec(kind="uniform_square", n=32, seed=3))
    summaries = run_trials(scenario, Variant.ALG1, range(3), workers=1)
    assert not any(s.timed_out for s in summaries)
    stats = transmission_stats([row for s in summaries for row in s.nodes])
    assert stats.nodes > 0
    assert stats.outside_hard == 0
