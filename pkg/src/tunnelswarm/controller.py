"""Per-robot reactive behaviour: excavation loop with prioritized overrides.

Priority order, highest first: collision avoidance; return-to-base on low
battery or a maintenance flag; chain hold; spacing hold; then the base
excavate/carry/deposit loop.  The controller only sees believed poses,
measured ranges and radio-shared peer state; ground truth stays in the
engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .comms import REFERENCE, UltrasonicContact
from .config import SimConstants
from .kinematics import (
    HIT_ROBOT,
    HIT_STATIC,
    RAY_ANGLES,
    STOP,
    Pose,
    WheelCommand,
    wrap_angle,
)
from .pfddr import FaultFlag


class BehaviorMode(Enum):
    IN_ZONE_IDLE = "in_zone_idle"
    CHARGING = "charging"
    UNDER_MAINTENANCE = "under_maintenance"
    TRANSIT_TO_FACE = "transit_to_face"
    EXCAVATING = "excavating"
    RETURN_TO_BASE = "return_to_base"
    AVOIDING = "avoiding"
    HOLD_CHAIN = "hold_chain"
    HOLD_SPACING = "hold_spacing"
    HOLD_BLOCKED = "hold_blocked"
    LOST = "lost"
    FAILED = "failed"


class ReturnReason(Enum):
    DEPOSIT = "deposit"
    LOW_POWER = "low_power"
    MAINTENANCE_NEEDED = "maintenance_needed"


class Task(Enum):
    IDLE = "idle"
    CHARGE = "charge"
    MAINTAIN = "maintain"
    TO_FACE = "to_face"
    DIG = "dig"
    RETURN = "return"


@dataclass(frozen=True)
class PeerState:
    """Radio-shared state of one other robot."""

    robot_id: int
    believed_x: float
    believed_y: float
    linked: bool
    returning: bool = False  # heading home loaded, low or flagged
    outbound: bool = False   # heading out to the face, empty


@dataclass
class ControlContext:
    """Everything a robot perceives on one tick."""

    t: float
    believed: Pose | None            # None when localization is lost
    battery: float
    payload: float
    scan: list[tuple[float, int]]    # 7 annotated (distance, hit kind) rays
    contacts: list[UltrasonicContact]
    peers: list[PeerState]
    linked: bool
    flags: frozenset
    frontier: list[tuple[int, int]]
    in_zone: bool                    # believed position inside the zone


@dataclass
class Decision:
    command: WheelCommand
    mode: BehaviorMode
    excavate_block: tuple[int, int] | None = None
    resume: BehaviorMode | None = None


def select_block(frontier: list[tuple[int, int]], believed_y: float,
                 grid) -> tuple[int, int]:
    """Frontier block whose column centre is nearest the believed y;
    ties break toward the lowest (row, col).

    Only blocks in the shallowest frontier row are eligible: the face is
    cleared one full row at a time so the excavation always spans the
    whole corridor width.  Digging a single column ahead of its
    neighbours would cut a robot-width slot a robot can wedge itself in.
    """
    if not frontier:
        raise ValueError("frontier is empty")
    min_row = min(block[0] for block in frontier)
    best = None
    best_key = None
    for block in frontier:
        if block[0] != min_row:
            continue
        dist = abs(grid.column_center_y(block[1]) - believed_y)
        key = (round(dist, 12), block)
        if best_key is None or key < best_key:
            best, best_key = block, key
    return best


def avoidance_command(scan: list[tuple[float, int]], frontal_block: bool,
                      side_block_left: bool, constants: SimConstants) -> WheelCommand:
    """Reactive avoidance.

    A frontal obstruction very close by forces a rotation in place away
    from the side with less clearance; a frontal obstruction with room to
    spare is arced around at half speed so that a stopped robot can be
    passed instead of stalling in front of it.  Side obstructions reduce
    speed and steer away.
    """
    v = constants.v_max
    if frontal_block:
        d_front = min(scan[i][0] for i in (2, 3, 4))
        left_clear = min(scan[i][0] for i in (4, 5, 6))
        right_clear = min(scan[i][0] for i in (0, 1, 2))
        if d_front < 0.30:
            u = 0.4 * v
            if left_clear >= right_clear:
                return WheelCommand(-u, u)   # rotate left (ccw)
            return WheelCommand(u, -u)       # rotate right (cw)
        omega = 1.2 if left_clear >= right_clear else -1.2
    else:
        # mild drift away; lane passing must keep making progress
        omega = -0.6 if side_block_left else 0.6
    half = 0.5 * v
    dv = omega * constants.wheel_base / 2.0
    v_l, v_r = half - dv, half + dv
    peak = max(abs(v_l), abs(v_r))
    if peak > v:
        v_l *= v / peak
        v_r *= v / peak
    return WheelCommand(v_l, v_r)


def steer_to(believed: Pose, wx: float, wy: float,
             constants: SimConstants) -> WheelCommand:
    """Turn-then-drive steering toward a waypoint."""
    bearing = math.atan2(wy - believed.y, wx - believed.x)
    err = wrap_angle(bearing - believed.theta)
    v_max = constants.v_max
    if abs(err) > 0.6:
        u = 0.4 * v_max
        return WheelCommand(-u, u) if err > 0 else WheelCommand(u, -u)
    omega = 3.0 * err
    dv = omega * constants.wheel_base / 2.0
    v_l, v_r = v_max - dv, v_max + dv
    peak = max(abs(v_l), abs(v_r))
    if peak > v_max:
        scale = v_max / peak
        v_l *= scale
        v_r *= scale
    return WheelCommand(v_l, v_r)


# believed-position slack on top of geometric thresholds
_DIG_ENTER_X = 0.28       # from the face plane of the assigned block
_DIG_COL_TOL = 0.12
# corridor lane discipline: outbound and returning traffic keep to
# opposite sides so they never meet head-on in the 0.8 m corridor
_OUT_LANE_Y = -0.25
_RETURN_LANE_Y = 0.25
_CHAIN_HOLD_MARGIN = 0.1
# forward-ray gates for the final face approach (true geometry, immune to
# localization error; the manipulator reaches 0.45 m from the centre)
_DIG_RAY_ENTER = 0.40
_DIG_RAY_ABORT = 0.44
# robots allowed past the zone mouth at once; the rest park in the zone
_MAX_ACTIVE = 5
# how long to wait, stopped, behind another robot before trying to steer
# around it.  Moving robots clear in seconds; a long corridor patience
# means a depleted robot blocking the tunnel stalls traffic rather than
# triggering an endless weaving melee around the wreck.
_BLOCK_PATIENCE_ZONE = 4.0       # s
_BLOCK_PATIENCE_CORRIDOR = 40.0  # s
_STUCK_WINDOW = 5.0       # s
_STUCK_DISPLACEMENT = 0.05  # m
_ESCAPE_REVERSE = 0.2     # m


class RobotController:
    """Persistent decision state for one robot."""

    def __init__(self, robot_id: int, home_xy: tuple[float, float],
                 constants: SimConstants, escape_rng):
        self.robot_id = robot_id
        self.home_xy = home_xy
        self.constants = constants
        self.escape_rng = escape_rng
        self.task = Task.IDLE
        self.return_reason: ReturnReason | None = None
        self.assigned: tuple[int, int] | None = None
        self.mode = BehaviorMode.IN_ZONE_IDLE
        # escape maneuver progress
        self._escape_reverse_left = 0.0
        self._escape_yaw_left = 0.0
        # latched detour around a frontal obstruction
        self._detour_dir = 0
        self._detour_forward_left = 0.0
        # patience countdown while stopped behind another robot
        self._block_wait_left: float | None = None
        self._waypoint: tuple[float, float] | None = None
        # (t, x, y) breadcrumbs for stuck detection
        self._crumbs: list[tuple[float, float, float]] = []
        self._resume_task: Task | None = None

    # -- helpers ----------------------------------------------------------

    def _face_ray(self, ctx: ControlContext) -> float:
        """Nearest static surface seen by the three forward rays."""
        best = math.inf
        for i in (2, 3, 4):
            d, kind = ctx.scan[i]
            if kind == HIT_STATIC:
                best = min(best, d)
        return best

    def _dig_point(self, grid, block) -> tuple[float, float, float]:
        face_x = grid.face_x + grid.block_size * block[0]
        return face_x, grid.column_center_y(block[1]), face_x - 0.22

    def _update_crumbs(self, t: float, believed: Pose | None, moving: bool) -> bool:
        """Track believed positions; True when pinned for the stuck window."""
        if believed is None or not moving:
            self._crumbs.clear()
            return False
        if not self._crumbs or t - self._crumbs[-1][0] >= 0.5:
            self._crumbs.append((t, believed.x, believed.y))
            self._crumbs = [c for c in self._crumbs if t - c[0] <= _STUCK_WINDOW + 0.6]
        old = [c for c in self._crumbs if t - c[0] >= _STUCK_WINDOW]
        if not old:
            return False
        _, ox, oy = old[-1]
        return math.hypot(believed.x - ox, believed.y - oy) < _STUCK_DISPLACEMENT

    def _begin_escape(self) -> None:
        self._escape_reverse_left = _ESCAPE_REVERSE
        self._escape_yaw_left = float(self.escape_rng.uniform(-math.pi / 6, math.pi / 6))
        self._crumbs.clear()

    def _escape_step(self, dt: float) -> WheelCommand:
        v = self.constants.v_max
        if self._escape_reverse_left > 0.0:
            u = 0.5 * v
            self._escape_reverse_left -= u * dt
            return WheelCommand(-u, -u)
        u = 0.4 * v
        omega = 2.0 * u / self.constants.wheel_base
        step = omega * dt
        if abs(self._escape_yaw_left) <= step:
            self._escape_yaw_left = 0.0
            return STOP
        if self._escape_yaw_left > 0:
            self._escape_yaw_left -= step
            return WheelCommand(-u, u)
        self._escape_yaw_left += step
        return WheelCommand(u, -u)

    def _escaping(self) -> bool:
        return self._escape_reverse_left > 0.0 or self._escape_yaw_left != 0.0

    # -- the decision function --------------------------------------------

    def decide(self, ctx: ControlContext, grid, dt: float) -> Decision:
        c = self.constants

        if self.task is Task.MAINTAIN:
            self.mode = BehaviorMode.UNDER_MAINTENANCE
            return Decision(STOP, self.mode)

        # localization loss: stop in place, keep the task for resumption
        if ctx.believed is None:
            if self.task in (Task.TO_FACE, Task.DIG, Task.RETURN):
                self._resume_task = self.task
            self.mode = BehaviorMode.LOST
            return Decision(STOP, self.mode)
        if self._resume_task is not None:
            self.task = self._resume_task
            self._resume_task = None
            if self.task is Task.DIG:
                self.task = Task.TO_FACE

        believed = ctx.believed

        # return-to-base trigger (P2).  Low battery always preempts.  A
        # maintenance flag preempts only while the robot is still on the
        # zone side of the entrance: once committed to the corridor it
        # finishes the payload trip first and gets serviced on the
        # return it was going to make anyway, so one trip covers both.
        if self.task in (Task.TO_FACE, Task.DIG):
            if ctx.flags and self.task is Task.TO_FACE and believed.x < 0.0:
                self.task = Task.RETURN
                self.return_reason = ReturnReason.MAINTENANCE_NEEDED
                self.assigned = None
            elif ctx.battery < c.charge_cutoff:
                self.task = Task.RETURN
                self.return_reason = ReturnReason.LOW_POWER
                self.assigned = None

        # zone-side bookkeeping
        if self.task in (Task.IDLE, Task.CHARGE):
            if self.task is Task.CHARGE and ctx.battery < 1.0 - 1e-12:
                self.mode = BehaviorMode.CHARGING
                return Decision(STOP, self.mode)
            if ctx.flags:
                # engine promotes to MAINTAIN once truly inside the zone
                self.mode = BehaviorMode.IN_ZONE_IDLE
                return Decision(STOP, self.mode)
            if ctx.battery < c.charge_cutoff or (
                    self.return_reason is ReturnReason.LOW_POWER
                    and ctx.battery < 1.0 - 1e-12):
                self.task = Task.CHARGE
                self.mode = BehaviorMode.CHARGING
                return Decision(STOP, self.mode)
            self.return_reason = None
            self.task = Task.TO_FACE

        wants_motion = self.task in (Task.TO_FACE, Task.RETURN)

        # escape maneuver runs to completion before anything else moves us
        if wants_motion and self._escaping():
            self.mode = BehaviorMode.AVOIDING
            return Decision(self._escape_step(dt), self.mode,
                            resume=self._task_mode())

        if self.task is Task.TO_FACE:
            decision = self._decide_to_face(ctx, grid, dt)
        elif self.task is Task.DIG:
            decision = self._decide_dig(ctx, grid, dt)
        elif self.task is Task.RETURN:
            decision = self._decide_return(ctx, grid, dt)
        else:
            self.mode = BehaviorMode.IN_ZONE_IDLE
            return Decision(STOP, self.mode)

        # collision avoidance (P1) wraps the steering behaviors.  Holds and
        # digs are stationary and carry no collision risk, so avoidance
        # never needs to preempt them; but once a detour is latched it must
        # keep control even while the underlying steering would only rotate,
        # otherwise the two fight over the turn direction forever.
        if decision.mode in (BehaviorMode.TRANSIT_TO_FACE,
                             BehaviorMode.RETURN_TO_BASE):
            frontal, side_left, side_right = self._avoid_triggers(
                ctx, grid, decision.command)
            # another robot dead ahead: wait for it to clear before
            # committing to a detour.  The wait costs nothing; weaving
            # around a robot that is about to move (or never will) is
            # what burns power and jams the corridor.
            frontal_robot = frontal and any(
                ctx.scan[i][1] == HIT_ROBOT and ctx.scan[i][0] < 0.35
                for i in (2, 3, 4))
            if frontal_robot and self._detour_dir == 0:
                # identify the blocker by matching the scan hit against
                # broadcast positions.  No broadcast near the hit means a
                # dead robot, and there is no protocol for squeezing past
                # a wreck, so hold station indefinitely.  A live blocker
                # headed the same way is a convoy leader: queue behind it
                # in the corridor rather than burning power weaving past.
                hit_i = min((i for i in (2, 3, 4)
                             if ctx.scan[i][1] == HIT_ROBOT
                             and ctx.scan[i][0] < 0.35),
                            key=lambda i: ctx.scan[i][0])
                ang = believed.theta + RAY_ANGLES[hit_i]
                hx = believed.x + ctx.scan[hit_i][0] * math.cos(ang)
                hy = believed.y + ctx.scan[hit_i][0] * math.sin(ang)
                blocker = None
                best_d = 0.45
                for p in ctx.peers:
                    d = math.hypot(p.believed_x - hx, p.believed_y - hy)
                    if d < best_d:
                        best_d, blocker = d, p
                # convoy only behind a robot that is actually further
                # along my direction of travel; two robots facing each
                # other must fall through to finite patience or they
                # stare at each other forever
                if self.task is Task.RETURN:
                    ahead = blocker is not None and blocker.believed_x < believed.x - 0.05
                else:
                    ahead = blocker is not None and blocker.believed_x > believed.x + 0.05
                same_dir = (blocker is not None and ahead
                            and blocker.returning == (self.task is Task.RETURN))
                if self._block_wait_left is None:
                    self._block_wait_left = (
                        _BLOCK_PATIENCE_ZONE if believed.x < 0.0
                        else _BLOCK_PATIENCE_CORRIDOR)
                if blocker is None or (same_dir and believed.x >= 0.0):
                    self._crumbs.clear()
                    self.mode = BehaviorMode.HOLD_BLOCKED
                    return Decision(STOP, self.mode, resume=decision.mode)
                if self._block_wait_left > 0.0:
                    self._block_wait_left -= dt
                    self._crumbs.clear()
                    self.mode = BehaviorMode.HOLD_BLOCKED
                    return Decision(STOP, self.mode, resume=decision.mode)
            elif not frontal_robot:
                self._block_wait_left = None
            if frontal or side_left or side_right or self._detour_dir:
                if self._update_crumbs(ctx.t, believed, True):
                    self._detour_dir = 0
                    self._begin_escape()
                    self.mode = BehaviorMode.AVOIDING
                    return Decision(self._escape_step(dt), self.mode,
                                    resume=decision.mode)
                avoid = self._avoid_step(ctx, frontal, side_left, dt)
                if avoid is not None:
                    self.mode = BehaviorMode.AVOIDING
                    return Decision(avoid, self.mode, resume=decision.mode)
        else:
            self._detour_dir = 0
            self._detour_forward_left = 0.0
        return decision

    def _avoid_step(self, ctx: ControlContext, frontal: bool,
                    side_left: bool, dt: float) -> WheelCommand | None:
        """One tick of obstacle negotiation, or None to release control.

        Frontal obstructions start a latched detour: rotate away until the
        frontal cone clears, then commit to a fixed forward leg before task
        steering resumes.  Without the forward leg, task steering would
        immediately turn back into the obstruction and undo the rotation.
        The detour is goal-aware: the forward leg only starts once the
        heading is at most roughly perpendicular to the bearing toward the
        current waypoint, so a detour can never drive the robot back the
        way it came.  Side obstructions just drift away at reduced speed.
        """
        c = self.constants
        v = c.v_max
        believed = ctx.believed
        err = 0.0
        if self._waypoint is not None and believed is not None:
            bearing = math.atan2(self._waypoint[1] - believed.y,
                                 self._waypoint[0] - believed.x)
            err = wrap_angle(bearing - believed.theta)
        if frontal and self._detour_dir == 0:
            if abs(err) > 1.0:
                # already facing well away from the goal: rotate back toward it
                self._detour_dir = 1 if err > 0 else -1
            else:
                left_clear = min(ctx.scan[i][0] for i in (4, 5, 6))
                right_clear = min(ctx.scan[i][0] for i in (0, 1, 2))
                self._detour_dir = 1 if left_clear >= right_clear else -1
            self._detour_forward_left = 0.35
        if self._detour_dir:
            if frontal or abs(err) > math.pi / 2 + 0.3:
                u = 0.4 * v
                return WheelCommand(-u, u) if self._detour_dir > 0 else WheelCommand(u, -u)
            if self._detour_forward_left > 0.0:
                half = 0.5 * v
                self._detour_forward_left -= half * dt
                return WheelCommand(half, half)
            self._detour_dir = 0
            return None
        # side obstruction only: mild drift away, keep making progress
        omega = -0.6 if side_left else 0.6
        half = 0.5 * v
        dv = omega * c.wheel_base / 2.0
        return WheelCommand(half - dv, half + dv)

    def _task_mode(self) -> BehaviorMode:
        return {
            Task.TO_FACE: BehaviorMode.TRANSIT_TO_FACE,
            Task.RETURN: BehaviorMode.RETURN_TO_BASE,
            Task.DIG: BehaviorMode.EXCAVATING,
        }.get(self.task, BehaviorMode.IN_ZONE_IDLE)

    def _avoid_triggers(self, ctx: ControlContext, grid,
                        cmd: WheelCommand) -> tuple[bool, bool, bool]:
        """(frontal, side-left, side-right) obstruction flags.

        Robots trigger frontally within 0.35 m and to the side within
        0.3 m.  Static surfaces only trigger in the frontal cone, close up
        (0.3 m), and only while actually driving forward — rotating in
        place next to a wall or the soil face is safe, and the walls flank
        the whole corridor anyway.  The robot's own assigned soil face
        never triggers during the final excavation approach.
        """
        c = self.constants
        driving = cmd.v_l + cmd.v_r > 0.3 * c.v_max
        ignore_frontal_static = not driving
        if self.task is Task.TO_FACE and self.assigned is not None and ctx.believed:
            face_x, col_y, _ = self._dig_point(grid, self.assigned)
            if (ctx.believed.x > face_x - 0.75
                    and abs(ctx.believed.y - col_y) < 0.2):
                ignore_frontal_static = True
        frontal = side_left = side_right = False
        for i, ang in enumerate(RAY_ANGLES):
            d, kind = ctx.scan[i]
            if d >= c.avoid_distance:
                continue
            if abs(ang) <= math.radians(30) + 1e-9:
                if (kind == HIT_ROBOT and d < 0.35) or (
                        kind == HIT_STATIC and d < 0.30
                        and not ignore_frontal_static):
                    frontal = True
            elif kind == HIT_ROBOT and d < 0.30:
                if ang > 0:
                    side_left = True
                else:
                    side_right = True
        return frontal, side_left, side_right

    def _decide_to_face(self, ctx: ControlContext, grid, dt: float) -> Decision:
        c = self.constants
        believed = ctx.believed
        if not ctx.frontier:
            self.task = Task.RETURN
            self.return_reason = ReturnReason.DEPOSIT
            self.assigned = None
            return self._decide_return(ctx, grid, dt)
        frontier_set = set(ctx.frontier)
        min_row = min(block[0] for block in ctx.frontier)
        if self.assigned not in frontier_set or self.assigned[0] != min_row:
            self.assigned = select_block(ctx.frontier, believed.y, grid)

        face_x, col_y, stand_x = self._dig_point(grid, self.assigned)

        # chain hold (P3): advancing must not sever the link to the base
        measured = [ct.measured for ct in ctx.contacts
                    if ct.peer == REFERENCE
                    or any(p.robot_id == ct.peer and p.linked for p in ctx.peers)]
        if not measured or min(measured) > c.chain_link_range - _CHAIN_HOLD_MARGIN:
            self.mode = BehaviorMode.HOLD_CHAIN
            self._crumbs.clear()
            return Decision(STOP, self.mode)

        # returning traffic has right of way: it must reach the zone before
        # its battery runs out, so nearby outbound robots get out of the way
        # and freeze rather than maneuver around it
        hold = False
        for p in ctx.peers:
            if not p.returning:
                continue
            dist = math.hypot(p.believed_x - believed.x,
                              p.believed_y - believed.y)
            if believed.x <= -0.1:
                # zone side: keep the corridor mouth open while the
                # returner comes through.  Clear the inbound lane if
                # standing in it, otherwise just stand still — driving
                # away to a staging spot only stirs up zone traffic
                if (p.believed_x > -0.6 and believed.x > -0.7
                        and abs(believed.y) < 0.5):
                    self.mode = BehaviorMode.HOLD_SPACING
                    self._crumbs.clear()
                    # park just off both lanes; short drive, then wait
                    if math.hypot(believed.x + 0.6, believed.y + 0.55) > 0.15:
                        self._waypoint = (-0.6, -0.55)
                        return Decision(
                            steer_to(believed, -0.6, -0.55, c), self.mode)
                    return Decision(STOP, self.mode)
            elif dist < 0.8 and p.believed_x > believed.x - 0.1:
                # in the corridor: clear the centre by pulling into the
                # outbound lane, then stand still until the returner,
                # which moves toward -x, has passed behind us
                if abs(believed.y - _OUT_LANE_Y) > 0.08:
                    self.mode = BehaviorMode.HOLD_SPACING
                    self._crumbs.clear()
                    self._waypoint = (believed.x, _OUT_LANE_Y)
                    return Decision(
                        steer_to(believed, believed.x, _OUT_LANE_Y, c),
                        self.mode)
                hold = True
                break

        # the mouth is single-lane for outbound traffic: one robot passes
        # at a time, in id order, and the rest wait at off-lane spots on
        # the zone side.  Five synchronized robots contesting the opening
        # jam it for good otherwise
        if not hold and believed.x < -0.3:
            box_busy = any(p.outbound and -0.3 < p.believed_x < 0.35
                           for p in ctx.peers)
            queued_ahead = any(p.outbound and p.robot_id < self.robot_id
                               and p.believed_x <= -0.3
                               for p in ctx.peers)
            if box_busy or queued_ahead:
                sx, sy = -0.55 - 0.15 * self.robot_id, -0.65
                self.mode = BehaviorMode.HOLD_SPACING
                self._crumbs.clear()
                if math.hypot(believed.x - sx, believed.y - sy) > 0.15:
                    self._waypoint = (sx, sy)
                    return Decision(steer_to(believed, sx, sy, c), self.mode)
                return Decision(STOP, self.mode)

        # spacing hold (P4): stay 1 m behind anyone further up the tunnel;
        # only applies near and inside the corridor, not deep in the zone
        if not hold and believed.x > -0.3:
            for ct in ctx.contacts:
                if ct.peer == REFERENCE or ct.measured >= c.spacing_distance:
                    continue
                for p in ctx.peers:
                    if p.robot_id != ct.peer:
                        continue
                    dx = p.believed_x - believed.x
                    # belief error can exceed 0.2 m, so "who is ahead"
                    # is ambiguous in a cluster; break ties by id or the
                    # whole cluster can end up waiting on itself
                    if dx > 0.05 and (dx > 0.25
                                      or p.robot_id < self.robot_id):
                        hold = True
                        break
                if hold:
                    break
        if hold:
            self.mode = BehaviorMode.HOLD_SPACING
            self._crumbs.clear()
            # finish pulling over into the outbound lane so the corridor
            # centre stays open for returning traffic
            if believed.x > -0.3 and abs(believed.y - _OUT_LANE_Y) > 0.08:
                self._waypoint = (believed.x, _OUT_LANE_Y)
                return Decision(
                    steer_to(believed, believed.x, _OUT_LANE_Y, self.constants),
                    self.mode)
            return Decision(STOP, self.mode)

        # arrival at the face: the believed pose can be decimetres off, so
        # the final approach trusts the forward rays, which measure true
        # geometry — dig only once the face is within manipulator reach
        if believed.x >= face_x - _DIG_ENTER_X and abs(believed.y - col_y) <= _DIG_COL_TOL:
            if self._face_ray(ctx) <= _DIG_RAY_ENTER:
                self.task = Task.DIG
                return self._decide_dig(ctx, grid, dt)
            if self._update_crumbs(ctx.t, believed, True):
                self._begin_escape()
                self.mode = BehaviorMode.AVOIDING
                return Decision(self._escape_step(dt), self.mode,
                                resume=self._task_mode())
            # believed says arrived but the face is still ahead: creep in
            self.mode = BehaviorMode.TRANSIT_TO_FACE
            self._waypoint = (believed.x + 0.8, col_y)
            return Decision(steer_to(believed, believed.x + 0.8, col_y, c),
                            self.mode)

        if self._update_crumbs(ctx.t, believed, True):
            self._begin_escape()
            self.mode = BehaviorMode.AVOIDING
            return Decision(self._escape_step(dt), self.mode, resume=self._task_mode())

        # line up with the outbound lane while still inside the zone: the
        # mouth is only passable near the lane centre, and an off-axis
        # approach wedges the robot against the entrance corner (or the
        # x=0 wall beside the mouth) with traffic piling up behind it
        off_lane = abs(believed.y - _OUT_LANE_Y) > 0.1
        if ((-0.6 < believed.x < -0.1 and off_lane)
                or (believed.x < 0.15 and abs(believed.y) > 0.35)):
            wx, wy = -0.45, _OUT_LANE_Y
        elif believed.x < -0.1:
            wx, wy = 0.3, _OUT_LANE_Y
        elif stand_x - believed.x > 0.6:
            wx, wy = believed.x + 0.8, _OUT_LANE_Y
        else:
            wx, wy = stand_x, col_y
        self.mode = BehaviorMode.TRANSIT_TO_FACE
        self._waypoint = (wx, wy)
        return Decision(steer_to(believed, wx, wy, self.constants), self.mode)

    def _decide_dig(self, ctx: ControlContext, grid, dt: float) -> Decision:
        if ctx.payload >= self.constants.robot_mass - 1e-9:
            self.task = Task.RETURN
            self.return_reason = ReturnReason.DEPOSIT
            self.assigned = None
            return self._decide_return(ctx, grid, dt)
        if self._face_ray(ctx) > _DIG_RAY_ABORT:
            # drifted (or was pushed) out of reach: re-approach the face
            self.task = Task.TO_FACE
            self.mode = BehaviorMode.TRANSIT_TO_FACE
            return Decision(STOP, self.mode)
        block = self.assigned
        if block is None or not grid.is_occupied(*block):
            if ctx.payload > 1e-9:
                self.task = Task.RETURN
                self.return_reason = ReturnReason.DEPOSIT
                self.assigned = None
                return self._decide_return(ctx, grid, dt)
            self.task = Task.TO_FACE
            self.assigned = None
            self.mode = BehaviorMode.TRANSIT_TO_FACE
            return Decision(STOP, self.mode)
        self.mode = BehaviorMode.EXCAVATING
        return Decision(STOP, self.mode, excavate_block=block)

    def _decide_return(self, ctx: ControlContext, grid, dt: float) -> Decision:
        believed = ctx.believed
        c = self.constants
        hx, hy = self.home_xy
        # the payload drops the moment the robot crosses into the zone;
        # if nothing needs charging or servicing, turn straight around at
        # the mouth instead of trekking to the home spot and back across
        # everyone else's path
        # once inside the zone, a low battery charges right where it is:
        # the charger covers the whole zone, and pushing on toward the
        # home spot through traffic has starved robots at the mouth
        if believed.x < -0.05 and ctx.battery < c.charge_cutoff:
            self.task = Task.CHARGE
            self.return_reason = ReturnReason.LOW_POWER
            self._crumbs.clear()
            self.mode = BehaviorMode.CHARGING
            return Decision(STOP, self.mode)
        if (believed.x < -0.1 and ctx.payload <= 1e-9
                and not ctx.flags
                and ctx.battery >= c.charge_cutoff
                and self.return_reason is ReturnReason.DEPOSIT):
            self.task = Task.TO_FACE
            self.return_reason = None
            self._crumbs.clear()
            self.mode = BehaviorMode.TRANSIT_TO_FACE
            return Decision(STOP, self.mode)
        if believed.x > 0.2:
            wx, wy = believed.x - 0.8, _RETURN_LANE_Y
        else:
            wx, wy = hx, hy
        if believed.x < 0.0 and math.hypot(believed.x - hx, believed.y - hy) < 0.2:
            self.task = Task.IDLE
            self.mode = BehaviorMode.IN_ZONE_IDLE
            self._crumbs.clear()
            return Decision(STOP, self.mode)
        if self._update_crumbs(ctx.t, believed, True):
            self._begin_escape()
            self.mode = BehaviorMode.AVOIDING
            return Decision(self._escape_step(dt), self.mode,
                            resume=BehaviorMode.RETURN_TO_BASE)
        self.mode = BehaviorMode.RETURN_TO_BASE
        self._waypoint = (wx, wy)
        return Decision(steer_to(believed, wx, wy, self.constants), self.mode)
