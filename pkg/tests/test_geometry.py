import numpy as np
import pytest

from src.localcast.schemas.scenario import PhysParams
from src.localcast.services.geometry import (
    cover_constant,
    distance,
    eligible_receivers,
    region_members,
    transmission_count,
)
from tests.conftest import make_scenario


@pytest.mark.parametrize(
    "p, q, expected",
    [((0, 0), (0, 0), 0.0), ((0, 0), (3, 4), 5.0)],
)
def test_distance(p, q, expected):
    assert distance(p, q) == pytest.approx(expected)


def test_distance_axis_offset(phys):
    assert distance((1, 1), (1, 1 + phys.r_b)) == pytest.approx(phys.r_b)


def test_single_node_has_no_members(single_node):
    assert region_members(single_node, 0, 100.0) == set()


def test_boundary_is_inclusive(phys):
    scenario = make_scenario([(0.0, 0.0), (phys.r_b, 0.0)])
    assert region_members(scenario, 0, phys.r_b) == {1}


def test_line_within_transmission_radius(phys):
    scenario = make_scenario([(i * phys.r_b, 0.0) for i in range(5)])
    assert region_members(scenario, 2, phys.r_t) == {0, 1, 3, 4}
    assert transmission_count(scenario, 2) == 5


def test_regions_are_nested(phys):
    points = [(0.03 * i, 0.07 * (i % 5)) for i in range(40)]
    scenario = make_scenario(points)
    for x in scenario.node_ids:
        b = region_members(scenario, x, phys.r_b)
        two_b = region_members(scenario, x, 2 * phys.r_b)
        t = region_members(scenario, x, phys.r_t)
        assert b <= two_b <= t


def test_later_waker_not_owed(phys):
    scenario = make_scenario([(0, 0), (phys.r_b / 2, 0)], wakes=[0, 4])
    assert eligible_receivers(scenario, 0, 10) == set()
    assert eligible_receivers(scenario, 1, 10) == {0}


def test_shut_down_node_not_owed(phys):
    scenario = make_scenario([(0, 0), (phys.r_b / 2, 0)], shutdowns=[None, 9])
    assert eligible_receivers(scenario, 0, 10) == set()
    assert eligible_receivers(scenario, 0, 8) == {1}


def test_empty_broadcast_region(single_node):
    assert eligible_receivers(single_node, 0, 0) == set()


def test_cover_constant_is_finite_and_grows_with_ratio(phys):
    base = cover_constant(phys)
    assert base > 1
    assert cover_constant(PhysParams(phi=1 / 12)) > base


def test_triangle_inequality_random_triples():
    rng = np.random.default_rng(11)
    for p, q, r in rng.uniform(-50.0, 50.0, size=(10_000, 3, 2)):
        assert distance(p, q) == distance(q, p) >= 0.0
        assert distance(p, r) <= distance(p, q) + distance(q, r) + 1e-9


@pytest.mark.parametrize("n_bound", [40, 64, 1 << 20])
def test_n_bound_does_not_change_regions(phys, n_bound):
    points = [(0.03 * i, 0.07 * (i % 5)) for i in range(40)]
    base = make_scenario(points)
    other = make_scenario(points, n_bound=n_bound)
    for x in base.node_ids:
        for radius in (phys.r_b, 2 * phys.r_b, phys.r_t):
            assert region_members(other, x, radius) == region_members(base, x, radius)
        assert transmission_count(other, x) == transmission_count(base, x)
