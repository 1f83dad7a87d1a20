import itertools

import numpy as np
import pytest

from src.localcast.schemas.scenario import PhysParams
from src.localcast.services.channel import (
    low_power,
    lp_threshold,
    protocol_decodes,
    received_power,
    resolve_slot,
    sinr_decodes,
)
from tests.conftest import make_scenario


def test_received_power_empty():
    scenario = make_scenario([(0, 0), (2, 0)])
    assert received_power(0, set(), scenario) == 0.0


def test_received_power_single_transmitter():
    scenario = make_scenario([(0, 0), (2, 0)])
    assert received_power(0, {1}, scenario) == pytest.approx(0.125)


def test_received_power_sums_and_skips_own_signal():
    scenario = make_scenario([(0, 0), (1, 0), (0, 2)])
    assert received_power(0, {0, 1, 2}, scenario) == pytest.approx(1.125)


@pytest.mark.parametrize(
    "points, transmitters, expected",
    [
        # SINR 8 / 0.5 = 16
        ([(0, 0), (0.5, 0)], {1}, True),
        # exactly r_t away: SINR 1 / 0.5 = 2
        ([(0, 0), (1.0, 0)], {1}, True),
        # interferer at 0.5: 8 / 8.5
        ([(0, 0), (0.5, 0), (-0.5, 0)], {1, 2}, False),
    ],
)
def test_sinr_decodes(points, transmitters, expected):
    scenario = make_scenario(points)
    assert sinr_decodes(0, 1, transmitters, scenario) is expected


def test_transmitter_cannot_decode():
    scenario = make_scenario([(0, 0), (0.5, 0)])
    assert not sinr_decodes(0, 1, {0, 1}, scenario)


def test_lp_threshold_defaults(phys):
    assert lp_threshold(phys) == pytest.approx(0.015625)


def test_lp_threshold_scales_with_r_b():
    base = PhysParams(phi=1 / 12)
    doubled = PhysParams(phi=1 / 6)
    assert lp_threshold(doubled) == pytest.approx(lp_threshold(base) / 8)


def test_low_power_alone():
    scenario = make_scenario([(0, 0), (4, 0)])
    assert low_power(0, {0}, scenario)


def test_low_power_at_threshold():
    scenario = make_scenario([(0, 0), (4, 0)])
    assert low_power(0, {0, 1}, scenario)


def test_low_power_above_threshold():
    scenario = make_scenario([(0, 0), (3.9, 0)])
    assert not low_power(0, {0, 1}, scenario)


@pytest.mark.parametrize(
    "sender_at, other_at, expected",
    [(0.8, 2.5, True), (0.8, 1.5, False), (1.2, None, False)],
)
def test_protocol_decodes(sender_at, other_at, expected):
    points = [(0, 0), (sender_at, 0)]
    transmitters = {1}
    if other_at is not None:
        points.append((-other_at, 0))
        transmitters.add(2)
    scenario = make_scenario(points, protocol=(1.0, 2.0))
    assert protocol_decodes(0, 1, transmitters, 1.0, 2.0, scenario) is expected


def test_resolve_slot_matches_scalar_rules():
    rng = np.random.default_rng(3)
    points = [tuple(p) for p in rng.uniform(0, 2, size=(30, 2))]
    scenario = make_scenario(points)
    transmitters = [0, 4, 7, 11, 20]
    awake = scenario.node_ids
    outcome = resolve_slot(scenario, 0, transmitters, awake)
    threshold = lp_threshold(scenario.phys)
    for y in awake:
        decoded = [x for x in transmitters if sinr_decodes(y, x, transmitters, scenario)]
        assert len(decoded) <= 1
        assert outcome.decodes.get(y) == (decoded[0] if decoded else None)
        power = received_power(y, transmitters, scenario)
        assert outcome.rx_power[y] == pytest.approx(power)
        assert (y in outcome.low_power) == (power <= threshold)


def test_resolve_slot_protocol_model():
    scenario = make_scenario([(0, 0), (0.8, 0), (-2.5, 0), (5, 0)], protocol=(1.0, 2.0))
    outcome = resolve_slot(scenario, 0, [1, 2], scenario.node_ids)
    assert outcome.decodes == {0: 1}


def test_resolve_slot_skips_sleeping_nodes():
    scenario = make_scenario([(0, 0), (0.5, 0), (0, 0.5)])
    outcome = resolve_slot(scenario, 0, [1], [0, 1])
    assert outcome.decodes == {0: 1}
    assert set(outcome.rx_power) == {0, 1}


def test_decodes_unique_in_dense_slots():
    rng = np.random.default_rng(11)
    points = [tuple(p) for p in rng.uniform(0, 1, size=(50, 2))]
    scenario = make_scenario(points)
    for transmitters in itertools.islice(itertools.combinations(range(50), 3), 200):
        outcome = resolve_slot(scenario, 0, transmitters, scenario.node_ids)
        assert set(outcome.decodes.values()) <= set(transmitters)
        assert not set(outcome.decodes) & set(transmitters)


def test_adding_a_transmitter_never_helps():
    rng = np.random.default_rng(5)
    points = [tuple(p) for p in rng.uniform(0, 2, size=(25, 2))]
    scenario = make_scenario(points)
    for _ in range(100):
        chosen = rng.choice(25, size=5, replace=False)
        transmitters, extra = set(int(v) for v in chosen[:4]), int(chosen[4])
        more = transmitters | {extra}
        for y in scenario.node_ids:
            assert received_power(y, more, scenario) >= received_power(y, transmitters, scenario)
            if y in transmitters:
                # LowPower never turns on when interference is added
                assert not low_power(y, more, scenario) or low_power(y, transmitters, scenario)
            if y in more:
                continue
            for x in transmitters:
                assert not sinr_decodes(y, x, more, scenario) or sinr_decodes(y, x, transmitters, scenario)
