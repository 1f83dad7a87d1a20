from typing import Optional, Sequence, Tuple

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from src.localcast.main import app
from src.localcast.schemas.scenario import (
    NodeSpec,
    PhysParams,
    ProtocolModel,
    ProtocolRadii,
    Scenario,
)


def make_scenario(
    points: Sequence[Tuple[float, float]],
    n_bound: Optional[int] = None,
    wakes: Optional[Sequence[int]] = None,
    shutdowns: Optional[Sequence[Optional[int]]] = None,
    protocol: Optional[Tuple[float, float]] = None,
) -> Scenario:
    """Scenario with node ids 0..k-1 at the given points."""
    nodes = [
        NodeSpec(
            id=i,
            x=x,
            y=y,
            wake=wakes[i] if wakes else 0,
            shutdown=shutdowns[i] if shutdowns else None,
        )
        for i, (x, y) in enumerate(points)
    ]
    model = "sinr"
    if protocol is not None:
        model = ProtocolModel(protocol=ProtocolRadii(r_t=protocol[0], r_i=protocol[1]))
    return Scenario(
        model=model,
        n_bound=n_bound or max(len(points), 2),
        nodes=nodes,
    )


@pytest.fixture
def phys():
    return PhysParams()


@pytest.fixture
def single_node():
    return make_scenario([(0.0, 0.0)])


@pytest.fixture
def close_pair(phys):
    return make_scenario([(0.0, 0.0), (phys.r_b / 2, 0.0)], n_bound=4)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def client():
    return TestClient(app)
