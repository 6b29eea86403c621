"""Differential-drive integration, collision resolution and proximity scans."""

import math

import pytest
from hypothesis import given, strategies as st

from tunnelswarm.config import SimConstants
from tunnelswarm.kinematics import (
    HIT_NONE,
    HIT_ROBOT,
    HIT_STATIC,
    Pose,
    RAY_ANGLES,
    ROBOT_RADIUS,
    WheelCommand,
    proximity_scan,
    proximity_scan_kinds,
    resolve_collisions,
    step_pose,
    wrap_angle,
)
from tunnelswarm.world import SoilGrid


@pytest.fixture
def grid():
    return SoilGrid(SimConstants())


class TestWrapAngle:
    def test_identity_in_range(self):
        assert wrap_angle(1.0) == 1.0
        assert wrap_angle(math.pi) == pytest.approx(math.pi)

    def test_wraps(self):
        assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)

    @given(st.floats(-50.0, 50.0))
    def test_range(self, theta):
        w = wrap_angle(theta)
        assert -math.pi < w <= math.pi + 1e-12


class TestStepPose:
    def test_straight_line_at_v_max(self):
        p = step_pose(Pose(0, 0, 0), WheelCommand(0.22, 0.22), 1.0)
        assert (p.x, p.y, p.theta) == pytest.approx((0.22, 0.0, 0.0))

    def test_pure_rotation(self):
        # omega = (v_r - v_l)/wheel_base = -0.22/0.16 = -1.375 rad/s
        p = step_pose(Pose(0, 0, 0), WheelCommand(0.11, -0.11), 1.0)
        assert (p.x, p.y) == pytest.approx((0.0, 0.0), abs=1e-12)
        assert p.theta == pytest.approx(-1.375)

    def test_zero_command_identity(self):
        p0 = Pose(0.3, -0.7, 1.2)
        p = step_pose(p0, WheelCommand(0.0, 0.0), 0.01)
        assert (p.x, p.y, p.theta) == (p0.x, p0.y, p0.theta)

    def test_quarter_circle_arc(self):
        # v=0.1, omega=1: after pi/2 s the robot is at (r, r) facing +y
        wb = 0.16
        cmd = WheelCommand(0.1 - wb / 2, 0.1 + wb / 2)
        p = step_pose(Pose(0, 0, 0), cmd, math.pi / 2, wb)
        assert (p.x, p.y) == pytest.approx((0.1, 0.1))
        assert p.theta == pytest.approx(math.pi / 2)

    @given(st.floats(-0.22, 0.22), st.floats(-0.22, 0.22),
           st.floats(0.001, 1.0), st.floats(-3.0, 3.0))
    def test_displacement_bound(self, v_l, v_r, dt, theta):
        p = step_pose(Pose(0, 0, theta), WheelCommand(v_l, v_r), dt)
        assert math.hypot(p.x, p.y) <= 0.22 * dt + 1e-9

    @given(st.floats(-0.22, 0.22), st.floats(-0.22, 0.22),
           st.floats(0.002, 0.5), st.floats(-3.0, 3.0))
    def test_halving_dt_converges(self, v_l, v_r, dt, theta):
        cmd = WheelCommand(v_l, v_r)
        one = step_pose(Pose(0, 0, theta), cmd, dt)
        half = step_pose(step_pose(Pose(0, 0, theta), cmd, dt / 2), cmd, dt / 2)
        assert math.hypot(one.x - half.x, one.y - half.y) < 1e-9
        assert abs(wrap_angle(one.theta - half.theta)) < 1e-9


class TestResolveCollisions:
    def test_truncated_at_face(self, grid):
        old = [Pose(1.35, 0.0, 0.0)]
        proposed = [Pose(1.45, 0.0, 0.0)]
        out = resolve_collisions(old, proposed, grid)
        # disc ends tangent to the soil at x = 1.5 - radius
        assert out[0].x == pytest.approx(1.5 - ROBOT_RADIUS, abs=1e-5)

    def test_head_on_symmetric_contact(self, grid):
        old = [Pose(0.3, 0.0, 0.0), Pose(0.7, 0.0, math.pi)]
        proposed = [Pose(0.45, 0.0, 0.0), Pose(0.55, 0.0, math.pi)]
        out = resolve_collisions(old, proposed, grid)
        gap = math.hypot(out[0].x - out[1].x, out[0].y - out[1].y)
        assert gap >= 2 * ROBOT_RADIUS - 1e-6
        assert gap == pytest.approx(0.20, abs=1e-5)

    def test_parallel_to_wall_unchanged(self, grid):
        old = [Pose(0.5, 0.25, 0.0)]
        proposed = [Pose(0.6, 0.25, 0.0)]
        out = resolve_collisions(old, proposed, grid)
        assert (out[0].x, out[0].y) == (0.6, 0.25)

    def test_inactive_robot_is_an_obstacle(self, grid):
        old = [Pose(0.3, 0.0, 0.0), Pose(0.55, 0.0, 0.0)]
        proposed = [Pose(0.45, 0.0, 0.0), Pose(0.7, 0.0, 0.0)]
        out = resolve_collisions(old, proposed, grid, active=[True, False])
        assert (out[1].x, out[1].y) == (0.55, 0.0)
        assert out[0].x == pytest.approx(0.35, abs=1e-5)


class TestProximityScan:
    def test_ray_order(self):
        assert [round(math.degrees(a)) for a in RAY_ANGLES] == [
            -90, -60, -30, 0, 30, 60, 90]

    def test_empty_surroundings_capped(self, grid):
        scan = proximity_scan(Pose(0.7, 0.0, 0.0), [], grid)
        # side rays hit the corridor walls at 0.4; forward hits soil at 0.8
        assert scan[0] == pytest.approx(0.4)
        assert scan[6] == pytest.approx(0.4)
        assert scan[3] == pytest.approx(0.8)

    def test_open_zone_all_capped(self, grid):
        scan = proximity_scan_kinds(Pose(-1.0, 0.0, 0.0), [], grid)
        # rays that reach neither wall nor soil within 1 m report the cap
        forward = scan[3]
        assert forward == (1.0, HIT_NONE)

    def test_robot_dead_ahead(self, grid):
        scan = proximity_scan_kinds(Pose(-1.0, 0.0, 0.0), [(-0.6, 0.0)], grid)
        d, kind = scan[3]
        assert d == pytest.approx(0.4 - ROBOT_RADIUS)
        assert kind == HIT_ROBOT

    def test_failed_robot_at_plus_90(self, grid):
        scan = proximity_scan_kinds(Pose(-1.0, 0.0, 0.0), [(-1.0, 0.3)], grid)
        d, kind = scan[6]
        assert d == pytest.approx(0.3 - ROBOT_RADIUS)
        assert kind == HIT_ROBOT

    def test_static_hit_kind(self, grid):
        scan = proximity_scan_kinds(Pose(1.0, 0.0, 0.0), [], grid)
        d, kind = scan[3]
        assert d == pytest.approx(0.5)
        assert kind == HIT_STATIC
