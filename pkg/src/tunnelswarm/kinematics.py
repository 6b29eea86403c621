"""Differential-drive kinematics, collision resolution and proximity sensing."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .world import SoilGrid, distance_to_static, static_clearance

ROBOT_RADIUS = 0.10
WHEEL_BASE = 0.16

# sensor rays, radians, ordered -90..+90 degrees
RAY_ANGLES = tuple(math.radians(a) for a in (-90, -60, -30, 0, 30, 60, 90))
PROXIMITY_CAP = 1.0

HIT_NONE = 0
HIT_STATIC = 1
HIT_ROBOT = 2


def wrap_angle(theta: float) -> float:
    """Normalize to (-pi, pi]."""
    theta = math.fmod(theta, 2.0 * math.pi)
    if theta > math.pi:
        theta -= 2.0 * math.pi
    elif theta <= -math.pi:
        theta += 2.0 * math.pi
    return theta


@dataclass
class Pose:
    x: float
    y: float
    theta: float  # radians in (-pi, pi]


@dataclass(frozen=True)
class WheelCommand:
    v_l: float
    v_r: float

    @property
    def is_zero(self) -> bool:
        return self.v_l == 0.0 and self.v_r == 0.0


STOP = WheelCommand(0.0, 0.0)


def step_pose(pose: Pose, achieved: WheelCommand, dt: float,
              wheel_base: float = WHEEL_BASE) -> Pose:
    """Exact arc integration of the differential-drive model."""
    v = 0.5 * (achieved.v_l + achieved.v_r)
    omega = (achieved.v_r - achieved.v_l) / wheel_base
    if abs(omega) < 1e-9:
        return Pose(
            pose.x + v * dt * math.cos(pose.theta),
            pose.y + v * dt * math.sin(pose.theta),
            pose.theta,
        )
    radius = v / omega
    theta1 = pose.theta + omega * dt
    return Pose(
        pose.x + radius * (math.sin(theta1) - math.sin(pose.theta)),
        pose.y - radius * (math.cos(theta1) - math.cos(pose.theta)),
        wrap_angle(theta1),
    )


def position_free(x: float, y: float, grid: SoilGrid,
                  obstacles: list[tuple[float, float]],
                  radius: float = ROBOT_RADIUS) -> bool:
    """True if a robot disc at (x, y) overlaps nothing."""
    if distance_to_static(x, y, grid) < radius - 1e-12:
        return False
    for ox, oy in obstacles:
        if math.hypot(x - ox, y - oy) < 2.0 * radius - 1e-12:
            return False
    return True


def _truncate_move(old: Pose, new: Pose, grid: SoilGrid,
                   obstacles: list[tuple[float, float]]) -> Pose:
    """Binary-search the largest collision-free fraction of the move."""
    lo, hi = 0.0, 1.0
    for _ in range(24):
        mid = 0.5 * (lo + hi)
        x = old.x + (new.x - old.x) * mid
        y = old.y + (new.y - old.y) * mid
        if position_free(x, y, grid, obstacles):
            lo = mid
        else:
            hi = mid
    # heading change is rotation, never blocked
    return Pose(old.x + (new.x - old.x) * lo, old.y + (new.y - old.y) * lo, new.theta)


def resolve_collisions(old_poses: list[Pose], proposed: list[Pose],
                       grid: SoilGrid, active: list[bool] | None = None) -> list[Pose]:
    """Truncate penetrating moves; conflicts resolve in ascending id order.

    ``active`` marks robots whose pose may change this tick; inactive
    (failed or stationary) robots keep their old pose and act as obstacles.
    """
    n = len(old_poses)
    if active is None:
        active = [True] * n
    resolved: list[Pose] = list(old_poses)
    for i in range(n):
        if not active[i]:
            continue
        obstacles = [(resolved[j].x, resolved[j].y) for j in range(n) if j != i]
        new = proposed[i]
        if position_free(new.x, new.y, grid, obstacles):
            resolved[i] = new
        else:
            resolved[i] = _truncate_move(old_poses[i], new, grid, obstacles)
    return resolved


def _ray_disc(px, py, dx, dy, cx, cy, radius):
    """Distance along the ray to a disc surface, or inf."""
    ox, oy = cx - px, cy - py
    proj = ox * dx + oy * dy
    if proj <= 0:
        return math.inf
    perp2 = ox * ox + oy * oy - proj * proj
    r2 = radius * radius
    if perp2 > r2:
        return math.inf
    t = proj - math.sqrt(r2 - perp2)
    return t if t > 0 else 0.0


def proximity_scan_kinds(pose: Pose, others: list[tuple[float, float]],
                         grid: SoilGrid, cap: float = PROXIMITY_CAP
                         ) -> list[tuple[float, int]]:
    """Per-ray (distance, hit kind); distances capped at 1 m.

    ``others`` are all other robot centres, including inert failed robots.
    """
    out = []
    for ang in RAY_ANGLES:
        d_static = static_clearance(pose.x, pose.y, pose.theta, ang, grid, cap)
        heading = pose.theta + ang
        dx, dy = math.cos(heading), math.sin(heading)
        d_robot = cap
        for cx, cy in others:
            t = _ray_disc(pose.x, pose.y, dx, dy, cx, cy, ROBOT_RADIUS)
            if t < d_robot:
                d_robot = t
        if d_robot < d_static:
            out.append((d_robot, HIT_ROBOT))
        elif d_static < cap:
            out.append((d_static, HIT_STATIC))
        else:
            out.append((cap, HIT_NONE))
    return out


def proximity_scan(pose: Pose, others: list[tuple[float, float]],
                   grid: SoilGrid, cap: float = PROXIMITY_CAP) -> list[float]:
    """The 7 proximity readings at -90..+90 degrees, metres capped at 1 m."""
    return [d for d, _ in proximity_scan_kinds(pose, others, grid, cap)]
