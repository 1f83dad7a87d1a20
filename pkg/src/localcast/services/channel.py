from typing import Dict, Iterable

import numpy as np
from scipy.spatial.distance import cdist

from src.localcast.core.exceptions import ChannelError
from src.localcast.models.outcome import SlotOutcome
from src.localcast.schemas.scenario import PhysParams, Scenario
from src.localcast.services.geometry import distance


def _position(scenario: Scenario, node_id: int):
    deployment = scenario.deployment
    return deployment.positions[deployment.index_of(node_id)]


def received_power(receiver: int, transmitters: Iterable[int], scenario: Scenario) -> float:
    """
    Total power received at a node from every transmitter but itself.

    Args:
        receiver: Node whose receiver is measured
        transmitters: Nodes transmitting in the slot
        scenario: Scenario holding positions and physics

    Returns:
        Sum of 1/d^alpha over transmitters other than the receiver

    Raises:
        ChannelError: If a transmitter sits on the receiver
    """
    target = _position(scenario, receiver)
    total = 0.0
    for w in sorted(transmitters):
        if w == receiver:
            continue
        d = distance(target, _position(scenario, w))
        if d == 0:
            raise ChannelError(f"Transmitter {w} is co-located with receiver {receiver}")
        total += PhysParams.POWER / d ** scenario.phys.alpha
    return total


def sinr_decodes(
    receiver: int, sender: int, transmitters: Iterable[int], scenario: Scenario
) -> bool:
    """
    Whether the receiver decodes the sender under the SINR model.

    A node that transmits in the slot decodes nothing.
    """
    transmitters = set(transmitters)
    if receiver in transmitters:
        return False
    d = distance(_position(scenario, sender), _position(scenario, receiver))
    if d == 0:
        raise ChannelError(f"Sender {sender} is co-located with receiver {receiver}")
    phys = scenario.phys
    signal = PhysParams.POWER / d ** phys.alpha
    interference = received_power(receiver, transmitters - {sender}, scenario)
    return signal / (phys.noise + interference) >= phys.beta


def lp_threshold(phys: PhysParams) -> float:
    """Received power at or below which the LowPower event holds."""
    return (4 * (phys.beta + 4) * phys.r_b) ** (-phys.alpha)


def low_power(x: int, transmitters: Iterable[int], scenario: Scenario) -> bool:
    return received_power(x, transmitters, scenario) <= lp_threshold(scenario.phys)


def protocol_decodes(
    receiver: int,
    sender: int,
    transmitters: Iterable[int],
    r_t: float,
    r_i: float,
    scenario: Scenario,
) -> bool:
    """
    Whether the receiver decodes the sender under the protocol model.

    Succeeds iff the sender is within r_t of the receiver and every other
    transmitter is farther than r_i from it.
    """
    transmitters = set(transmitters)
    if receiver in transmitters:
        return False
    at = _position(scenario, receiver)
    if distance(_position(scenario, sender), at) > r_t:
        return False
    return all(
        distance(_position(scenario, z), at) > r_i for z in transmitters if z != sender
    )


def resolve_slot(
    scenario: Scenario, slot: int, transmitters: Iterable[int], awake: Iterable[int]
) -> SlotOutcome:
    """
    Resolve one slot of the shared channel.

    Decodes are computed for every awake node that is not transmitting;
    received power and LowPower for every awake node.

    Raises:
        ChannelError: If a transmitter is co-located with another awake node
    """
    deployment = scenario.deployment
    phys = scenario.phys
    threshold = lp_threshold(phys)
    tx_ids = sorted(transmitters)
    awake_ids = sorted(awake)

    if not tx_ids:
        return SlotOutcome(
            slot=slot,
            transmitters=frozenset(),
            decodes={},
            rx_power={v: 0.0 for v in awake_ids},
            low_power=frozenset(awake_ids),
        )

    tx_idx = np.array([deployment.index_of(u) for u in tx_ids])
    awake_idx = np.array([deployment.index_of(v) for v in awake_ids])
    dist = cdist(deployment.positions[tx_idx], deployment.positions[awake_idx])
    own = tx_idx[:, None] == awake_idx[None, :]
    if np.any((dist == 0) & ~own):
        raise ChannelError(f"Co-located transmitter in slot {slot}")

    gain = np.zeros_like(dist)
    np.power(dist, -phys.alpha, out=gain, where=~own)
    total = gain.sum(axis=0)
    listening = ~own.any(axis=0)

    if scenario.is_protocol:
        radii = scenario.model.protocol
        blocking = dist <= radii.r_i
        others_blocking = blocking.sum(axis=0)[None, :] - blocking
        ok = (dist <= radii.r_t) & (others_blocking == 0)
    else:
        sinr = gain / (phys.noise + (total[None, :] - gain))
        ok = sinr >= phys.beta
    ok &= listening[None, :]

    decodes: Dict[int, int] = {}
    for col in np.flatnonzero(ok.any(axis=0)):
        rows = np.flatnonzero(ok[:, col])
        if len(rows) != 1:
            raise ChannelError(
                f"Receiver {awake_ids[col]} decoded {len(rows)} senders in slot {slot}"
            )
        decodes[awake_ids[col]] = tx_ids[rows[0]]

    rx_power = {v: float(total[k]) for k, v in enumerate(awake_ids)}
    return SlotOutcome(
        slot=slot,
        transmitters=frozenset(tx_ids),
        decodes=decodes,
        rx_power=rx_power,
        low_power=frozenset(v for v, power in rx_power.items() if power <= threshold),
    )
