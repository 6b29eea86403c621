"""Ultrasonic neighbour ranging, chain connectivity and pose estimation.

The tunnel reference point at (0, 0) is an always-on beacon: it emits at
the maximum ultrasonic range, never degrades, and anchors the
communication chain.  Robot emissions degrade with the emitter's sensing
coefficient, so a degraded robot still hears healthy peers while they
stop hearing it -- which is exactly what the handshake protocol samples.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

REFERENCE = -1  # pseudo peer id of the tunnel reference beacon

REFERENCE_XY = (0.0, 0.0)


@dataclass(frozen=True)
class UltrasonicContact:
    peer: int           # robot id, or REFERENCE
    true_range: float   # engine-side ground truth
    measured: float     # range with multiplicative noise


def ultrasonic_contacts(robot_id: int, positions: list[tuple[float, float]],
                        alive: list[bool], emission_ranges: list[float],
                        reference_range: float,
                        measurement_draws) -> list[UltrasonicContact]:
    """Contacts a listening robot obtains this sample.

    A peer is in contact iff the true range does not exceed the *peer's*
    (emitter's) degraded transmission range.  ``measurement_draws`` yields
    one standard-normal value per candidate peer, reference first then
    robot ids ascending; the measured range carries a 10 % multiplicative
    error.  Failed robots neither emit nor listen.
    """
    if not alive[robot_id]:
        return []
    x, y = positions[robot_id]
    draws = iter(measurement_draws)
    out: list[UltrasonicContact] = []
    rx, ry = REFERENCE_XY
    r = math.hypot(x - rx, y - ry)
    draw = next(draws)
    if r <= reference_range:
        out.append(UltrasonicContact(REFERENCE, r, r * (1.0 + 0.1 * draw)))
    for peer in range(len(positions)):
        if peer == robot_id or not alive[peer]:
            continue
        px, py = positions[peer]
        r = math.hypot(x - px, y - py)
        draw = next(draws)
        if r <= emission_ranges[peer]:
            out.append(UltrasonicContact(peer, r, r * (1.0 + 0.1 * draw)))
    return out


@dataclass(frozen=True)
class ChainStatus:
    linked: tuple[bool, ...]
    hops: tuple[float, ...]  # hop count to the reference, inf if unlinked


def compute_chain(positions: list[tuple[float, float]], alive: list[bool],
                  emission_ranges: list[float], reference_range: float,
                  chain_link_range: float = 2.0) -> ChainStatus:
    """Breadth-first link propagation from the reference point.

    An edge requires mutual ultrasonic contact within the chain-link
    range, i.e. true range <= min(chain range, both emission ranges).
    """
    n = len(positions)
    hops = [math.inf] * n
    queue: deque[int] = deque()
    rx, ry = REFERENCE_XY
    for i in range(n):
        if not alive[i]:
            continue
        r = math.hypot(positions[i][0] - rx, positions[i][1] - ry)
        if r <= min(chain_link_range, emission_ranges[i], reference_range):
            hops[i] = 1
            queue.append(i)
    while queue:
        i = queue.popleft()
        xi, yi = positions[i]
        for j in range(n):
            if not alive[j] or hops[j] <= hops[i] + 1:
                continue
            r = math.hypot(positions[j][0] - xi, positions[j][1] - yi)
            if r <= min(chain_link_range, emission_ranges[i], emission_ranges[j]):
                if hops[j] == math.inf:
                    queue.append(j)
                hops[j] = hops[i] + 1
    return ChainStatus(tuple(h < math.inf for h in hops), tuple(hops))


def handshake_sample(robot_id: int, positions: list[tuple[float, float]],
                     believed: list[tuple[float, float] | None],
                     alive: list[bool], own_emission_range: float,
                     neighbour_range: float = 2.0) -> int:
    """1 if any radio-known neighbour within 2 m missed this robot's emission.

    Neighbourhood is judged on believed (radio-reported) positions;
    reception on true range versus the robot's own transmission range.
    Robots with no believed position do not count as neighbours.
    """
    if not alive[robot_id] or believed[robot_id] is None:
        return 0
    bx, by = believed[robot_id]
    x, y = positions[robot_id]
    for peer in range(len(positions)):
        if peer == robot_id or not alive[peer] or believed[peer] is None:
            continue
        pbx, pby = believed[peer]
        if math.hypot(pbx - bx, pby - by) > neighbour_range:
            continue
        true_range = math.hypot(positions[peer][0] - x, positions[peer][1] - y)
        if true_range > own_emission_range:
            return 1
    return 0


def estimate_offset(contacts: list[UltrasonicContact], peer_linked: dict[int, bool],
                    magnitude_draw: float, direction_draw: float
                    ) -> tuple[float, float] | None:
    """Planar believed-position offset, or None when localization is lost.

    Requires at least one anchor in contact: the reference, or a peer that
    is itself chain-linked.  The error magnitude scales with the range to
    the nearest anchor; the direction is uniform on the circle.
    """
    nearest = math.inf
    for c in contacts:
        if c.peer == REFERENCE or peer_linked.get(c.peer, False):
            nearest = min(nearest, c.true_range)
    if nearest == math.inf:
        return None
    mag = abs(0.1 * magnitude_draw) * nearest
    ang = direction_draw * 2.0 * math.pi
    return (mag * math.cos(ang), mag * math.sin(ang))
