"""Ultrasonic contacts, chain connectivity, handshakes and pose estimation."""

import math

import pytest
from hypothesis import given, strategies as st

from tunnelswarm.comms import (
    REFERENCE,
    compute_chain,
    estimate_offset,
    handshake_sample,
    ultrasonic_contacts,
    UltrasonicContact,
)
from tunnelswarm.degradation import sensing_range

D_MAX = 2.5
# dc at which the emission range is exactly 1.5 m: 0.5 + 2 exp(-2 dc) = 1.5
DC_RANGE_1_5 = math.log(2.0) / 2.0


def test_dc_for_degraded_range():
    assert sensing_range(DC_RANGE_1_5) == pytest.approx(1.5, abs=1e-12)
    assert sensing_range(0.3465) == pytest.approx(1.5, abs=1e-3)


class TestUltrasonicContacts:
    def test_nominal_contact(self):
        positions = [(4.0, 0.0), (5.0, 0.0)]
        out = ultrasonic_contacts(0, positions, [True, True], [D_MAX, D_MAX],
                                  D_MAX, [0.0, 0.0])
        # reference at (0,0) is 4 m away, out of range; the peer is in range
        assert len(out) == 1
        assert out[0].peer == 1
        assert out[0].measured == pytest.approx(1.0)

    def test_degraded_emitter_not_heard(self):
        # the peer's emission range is 1.5 m; at 2.2 m there is no contact
        degraded = sensing_range(DC_RANGE_1_5)
        positions = [(4.0, 0.0), (6.2, 0.0)]
        out = ultrasonic_contacts(0, positions, [True, True], [D_MAX, degraded],
                                  D_MAX, [0.0, 0.0])
        assert out == []

    def test_measurement_noise(self):
        positions = [(4.0, 0.0), (5.0, 0.0)]
        out = ultrasonic_contacts(0, positions, [True, True], [D_MAX, D_MAX],
                                  D_MAX, [0.0, 1.0])
        assert out[0].measured == pytest.approx(1.1)
        assert out[0].true_range == pytest.approx(1.0)

    def test_failed_robots_silent(self):
        positions = [(4.0, 0.0), (5.0, 0.0)]
        assert ultrasonic_contacts(0, positions, [True, False],
                                   [D_MAX, D_MAX], D_MAX, [0.0, 0.0]) == []
        assert ultrasonic_contacts(1, positions, [False, True],
                                   [D_MAX, D_MAX], D_MAX, [0.0, 0.0]) == []

    def test_reference_always_heard_in_range(self):
        out = ultrasonic_contacts(0, [(1.0, 0.0)], [True], [0.5], D_MAX, [0.0])
        assert out[0].peer == REFERENCE
        assert out[0].measured == pytest.approx(1.0)


class TestComputeChain:
    def test_two_robot_chain(self):
        chain = compute_chain([(1.0, 0.0), (2.5, 0.0)], [True, True],
                              [D_MAX, D_MAX], D_MAX)
        assert chain.linked == (True, True)
        assert chain.hops == (1, 2)

    def test_single_robot_out_of_range(self):
        chain = compute_chain([(2.5, 0.0)], [True], [D_MAX], D_MAX)
        assert chain.linked == (False,)
        assert chain.hops[0] == math.inf

    def test_failed_middle_robot_breaks_chain(self):
        chain = compute_chain([(1.0, 0.0), (2.5, 0.0), (4.0, 0.0)],
                              [True, False, True], [D_MAX, D_MAX, D_MAX], D_MAX)
        assert chain.linked == (True, False, False)

    def test_degraded_emitter_breaks_edge(self):
        # link edges need mutual contact: a 1.2 m gap with a 1.0 m emitter fails
        chain = compute_chain([(1.0, 0.0), (2.2, 0.0)], [True, True],
                              [D_MAX, 1.0], D_MAX)
        assert chain.linked == (True, False)

    @given(st.lists(st.tuples(st.floats(0.0, 6.0), st.floats(-0.4, 0.4)),
                    min_size=1, max_size=6),
           st.tuples(st.floats(0.0, 6.0), st.floats(-0.4, 0.4)))
    def test_adding_a_robot_never_unlinks(self, positions, extra):
        ranges = [D_MAX] * len(positions)
        before = compute_chain(positions, [True] * len(positions), ranges, D_MAX)
        after = compute_chain(positions + [extra], [True] * (len(positions) + 1),
                              ranges + [D_MAX], D_MAX)
        for i, linked in enumerate(before.linked):
            if linked:
                assert after.linked[i]


class TestHandshake:
    def test_all_confirm(self):
        positions = [(1.0, 0.0), (2.0, 0.0)]
        believed = [(1.0, 0.0), (2.0, 0.0)]
        assert handshake_sample(0, positions, believed, [True, True], D_MAX) == 0

    def test_degraded_emitter_missed(self):
        # own range 1.5 m, a believed-neighbour at 1.8 m misses the emission
        positions = [(1.0, 0.0), (2.8, 0.0)]
        believed = [(1.0, 0.0), (2.8, 0.0)]
        assert handshake_sample(0, positions, believed, [True, True], 1.5) == 1

    def test_no_neighbours_vacuous(self):
        positions = [(1.0, 0.0), (5.0, 0.0)]
        believed = [(1.0, 0.0), (5.0, 0.0)]
        assert handshake_sample(0, positions, believed, [True, True], 1.5) == 0

    def test_zero_false_positives_at_full_range(self):
        # any geometry: a healthy emitter (2.5 m) cannot miss a 2 m neighbour
        positions = [(0.0, 0.0), (1.9, 0.0), (0.5, 0.3)]
        believed = list(positions)
        alive = [True] * 3
        for i in range(3):
            assert handshake_sample(i, positions, believed, alive, D_MAX) == 0


class TestEstimateOffset:
    def test_zero_draw_zero_offset(self):
        contacts = [UltrasonicContact(REFERENCE, 1.0, 1.0)]
        off = estimate_offset(contacts, {}, 0.0, 0.0)
        assert off == pytest.approx((0.0, 0.0))

    def test_unit_draw_offset_magnitude(self):
        contacts = [UltrasonicContact(REFERENCE, 1.0, 1.0)]
        off = estimate_offset(contacts, {}, 1.0, 0.25)  # direction +y
        assert off == pytest.approx((0.0, 0.1), abs=1e-12)

    def test_linked_peer_is_an_anchor(self):
        contacts = [UltrasonicContact(3, 2.0, 2.1)]
        off = estimate_offset(contacts, {3: True}, 1.0, 0.0)
        assert off == pytest.approx((0.2, 0.0))

    def test_unlinked_peers_only_is_lost(self):
        contacts = [UltrasonicContact(3, 2.0, 2.1)]
        assert estimate_offset(contacts, {3: False}, 0.5, 0.1) is None

    def test_no_contacts_is_lost(self):
        assert estimate_offset([], {}, 0.5, 0.1) is None

    @given(st.floats(-3.0, 3.0), st.floats(0.0, 1.0), st.floats(0.1, 2.5))
    def test_error_bounded_by_anchor_range(self, mag, direction, anchor_range):
        contacts = [UltrasonicContact(REFERENCE, anchor_range, anchor_range)]
        off = estimate_offset(contacts, {}, mag, direction)
        assert math.hypot(*off) <= abs(0.1 * mag) * anchor_range + 1e-12
