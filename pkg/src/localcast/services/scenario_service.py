import math
from typing import List, Optional

import numpy as np

from src.localcast.core.config import logger
from src.localcast.core.exceptions import ScenarioError
from src.localcast.schemas.experiment import GeneratorSpec, ShutdownModel, WakeModel
from src.localcast.schemas.scenario import (
    AlgoConsts,
    NodeSpec,
    ProtocolModel,
    ProtocolRadii,
    Scenario,
)
from src.localcast.services.lowerbound import build_two_region_instance
from src.localcast.services.rng import trial_generator

# mean spacing below this fraction of r_t cannot be told apart from co-location
MIN_MEAN_SPACING = 1e-6
GENERATOR_KEY = 0x6E


def square_side(spec: GeneratorSpec) -> float:
    """Side of the uniform square: explicit, from density, or one node per r_t^2."""
    r_t = spec.phys.r_t
    if spec.side is not None:
        side = spec.side
    elif spec.density is not None:
        side = math.sqrt(spec.n / spec.density)
    else:
        side = math.sqrt(spec.n) * r_t
    if side / math.sqrt(spec.n) < MIN_MEAN_SPACING * r_t:
        raise ScenarioError(f"Infeasible density: {spec.n} nodes in a square of side {side}")
    return side


def _uniform_square(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    side = square_side(spec)
    return rng.uniform(0.0, side, size=(spec.n, 2))


def _cluster_sizes(n: int, clusters: int) -> List[int]:
    base, extra = divmod(n, clusters)
    return [base + (1 if k < extra else 0) for k in range(clusters)]


def _clustered(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    r_t, r_b = spec.phys.r_t, spec.phys.r_b
    radius = spec.cluster_radius or r_b / 2
    # centres on a square grid, far enough apart that clusters do not share T_x
    spacing = spec.cluster_spacing or 4 * r_t
    if spacing < 2 * radius:
        raise ScenarioError(f"Infeasible density: clusters of radius {radius} overlap at spacing {spacing}")
    cols = math.ceil(math.sqrt(spec.clusters))
    parts = []
    for k, size in enumerate(_cluster_sizes(spec.n, spec.clusters)):
        centre = np.array([(k % cols) * spacing, (k // cols) * spacing])
        rho = radius * np.sqrt(rng.uniform(0.0, 1.0, size))
        theta = rng.uniform(0.0, 2 * math.pi, size)
        parts.append(centre + np.column_stack([rho * np.cos(theta), rho * np.sin(theta)]))
    return np.vstack(parts)


def _line(spec: GeneratorSpec) -> np.ndarray:
    spacing = spec.spacing or spec.phys.r_b
    return np.column_stack([np.arange(spec.n) * spacing, np.zeros(spec.n)])


def wake_slots(model: WakeModel, count: int, rng: np.random.Generator) -> np.ndarray:
    if model.kind == "staggered":
        order = rng.permutation(count)
        return np.floor(order / model.rate).astype(np.int64)
    if model.kind == "random_window":
        return rng.integers(0, model.window, size=count)
    return np.zeros(count, dtype=np.int64)


def shutdown_slot(model: ShutdownModel, wake: int) -> Optional[int]:
    return wake + model.slots if model.kind == "after" else None


def generate_scenario(spec: GeneratorSpec) -> Scenario:
    """
    Build a scenario from a generator spec.

    Placement, wake and shutdown draws all come from one stream keyed by the
    spec's seed, so the same spec always yields the same scenario.

    Args:
        spec: Layout kind, size and timing models

    Returns:
        Validated scenario

    Raises:
        ScenarioError: If the density is infeasible or the result fails validation
        LowerBoundError: If a two_region layout has infeasible radii
    """
    rng = trial_generator(spec.seed, GENERATOR_KEY)
    model = "sinr"
    if spec.kind == "uniform_square":
        positions = _uniform_square(spec, rng)
    elif spec.kind == "clustered":
        positions = _clustered(spec, rng)
    elif spec.kind == "line":
        positions = _line(spec)
    else:
        instance = build_two_region_instance(spec.n, spec.sparse, spec.r_t, spec.r_i)
        positions = instance.positions()
        model = ProtocolModel(protocol=ProtocolRadii(r_t=instance.r_t, r_i=instance.r_i))

    count = len(positions)
    n_bound = spec.n_bound or count
    if n_bound < count:
        raise ScenarioError(f"n_bound {n_bound} is below the generated node count {count}")

    wakes = wake_slots(spec.wake, count, rng)
    nodes = []
    for i, ((x, y), wake) in enumerate(zip(positions, wakes)):
        wake = int(wake)
        nodes.append(
            NodeSpec(
                id=i,
                x=float(x),
                y=float(y),
                wake=wake,
                shutdown=shutdown_slot(spec.shutdown, wake),
            )
        )

    try:
        scenario = Scenario(
            phys=spec.phys,
            model=model,
            n_bound=n_bound,
            consts=AlgoConsts(delta=spec.delta, gamma=spec.gamma),
            nodes=nodes,
        )
    except ValueError as e:
        raise ScenarioError(f"Generated scenario is invalid: {e}")
    logger.info(f"Generated {spec.kind} scenario: {count} nodes, n_bound={n_bound}, seed={spec.seed}")
    return scenario

