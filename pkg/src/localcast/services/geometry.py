import math
from typing import Set, Tuple

from src.localcast.schemas.scenario import PhysParams, Scenario

Point = Tuple[float, float]


def distance(p: Point, q: Point) -> float:
    """Euclidean distance between two points in the plane."""
    return math.hypot(p[0] - q[0], p[1] - q[1])


def region_members(scenario: Scenario, x: int, radius: float) -> Set[int]:
    """
    All nodes other than x within the closed ball of the given radius around x.

    Args:
        scenario: Scenario holding the node positions
        x: Centre node id
        radius: Ball radius (r_t gives T_x, r_b gives B_x, 2 r_b gives 2B_x)

    Returns:
        Set of node ids, x excluded

    Raises:
        ScenarioError: If x is not a node of the scenario
    """
    deployment = scenario.deployment
    i = deployment.index_of(x)
    return {deployment.ids[j] for j in deployment.neighbours(i, radius)}


def transmission_count(scenario: Scenario, x: int) -> int:
    """N_x = |T_x|, counting x itself."""
    return len(region_members(scenario, x, scenario.phys.r_t)) + 1


def eligible_receivers(scenario: Scenario, x: int, slot: int) -> Set[int]:
    """
    Nodes in B_x that x owes delivery to at the given slot.

    A node is owed delivery if it woke no later than x and has not shut
    down by this slot. Equal wake slots owe each other.
    """
    sender = scenario.node(x)
    eligible = set()
    for y in region_members(scenario, x, scenario.phys.r_b):
        node = scenario.node(y)
        if node.wake <= sender.wake and (node.shutdown is None or node.shutdown > slot):
            eligible.add(y)
    return eligible


def cover_constant(phys: PhysParams) -> int:
    """
    Number of r_b balls on a hexagonal covering lattice that meet an r_t ball.

    Discs of radius r_b centred on a triangular lattice of spacing sqrt(3) r_b
    cover the plane; every lattice point within r_t + r_b of the centre is
    counted, which covers the whole transmission ball.
    """
    spacing = math.sqrt(3) * phys.r_b
    reach = phys.r_t + phys.r_b
    rows = int(math.ceil(reach / (spacing * math.sqrt(3) / 2))) + 1
    cols = int(math.ceil(reach / spacing)) + 1
    count = 0
    for row in range(-rows, rows + 1):
        offset = spacing / 2 if row % 2 else 0.0
        y = row * spacing * math.sqrt(3) / 2
        for col in range(-cols - 1, cols + 2):
            if math.hypot(col * spacing + offset, y) <= reach:
                count += 1
    return count
