"""Deterministic 100 Hz simulation loop.

Fixed stage order per tick: fault injection (whole seconds), comms
snapshot (10 Hz), controller decisions, physical output factors,
kinematics and collision resolution, power accounting, failure handling,
PFDDR recording/detection, maintenance timers, metrics.  All randomness
comes from named per-robot substreams derived from (seed, replicate,
robot id, stream), so a replicate is bit-reproducible in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import comms, degradation, faults
from .config import ScenarioSpec, SimConstants
from .controller import (
    BehaviorMode,
    ControlContext,
    PeerState,
    RobotController,
    Task,
)
from .degradation import DegradationState
from .kinematics import (
    Pose,
    STOP,
    WheelCommand,
    position_free,
    proximity_scan_kinds,
    step_pose,
    _truncate_move,
)
from .pfddr import FaultFlag, PfddrMonitor, complete_maintenance, dc_snapshot_at_detection
from .world import SoilGrid, Zone, distance_to_static, zone_of

# fixed service order for queued maintenance categories
_MAINTENANCE_ORDER = (FaultFlag.SENSING, FaultFlag.MOTOR, FaultFlag.EXCAVATION)

# engine-side tolerance for digging reach, on ground-truth pose
_DIG_REACH_X = 0.45
_DIG_REACH_Y = 0.17


class InvariantViolation(AssertionError):
    pass


class _NormalBuffer:
    """Serves scalar standard-normal draws from chunked generator output."""

    __slots__ = ("_gen", "_buf", "_i", "_chunk")

    def __init__(self, gen: np.random.Generator, chunk: int = 8192):
        self._gen = gen
        self._chunk = chunk
        self._buf = gen.standard_normal(chunk)
        self._i = 0

    def next(self) -> float:
        i = self._i
        if i >= self._chunk:
            self._buf = self._gen.standard_normal(self._chunk)
            i = 0
        self._i = i + 1
        return self._buf[i]


class RngStreams:
    """Named substreams: reproducible from (seed, replicate, robot, stream)."""

    _STREAMS = ("injection", "power", "dc_noise", "localization", "escape")

    def __init__(self, seed: int, replicate: int, n_robots: int):
        def gen(*key):
            return np.random.Generator(np.random.PCG64(
                np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, replicate) + key)))

        self.scenario = gen(0xC0)
        self.injection = [gen(i, 0) for i in range(n_robots)]
        self.power = [_NormalBuffer(gen(i, 1)) for i in range(n_robots)]
        self.dc_noise = [_NormalBuffer(gen(i, 2)) for i in range(n_robots)]
        self.localization = [gen(i, 3) for i in range(n_robots)]
        self.loc_normal = [_NormalBuffer(g) for g in
                           [gen(i, 5) for i in range(n_robots)]]
        self.escape = [gen(i, 4) for i in range(n_robots)]


@dataclass
class Detection:
    t: float
    robot_id: int
    category: str
    dc_at_detection: float


@dataclass
class RobotDiagnostics:
    final_dc: tuple[float, float, float, float]
    final_battery: float
    depleted: bool
    last_second_speed: float
    final_mode: str


@dataclass
class RunMetrics:
    scenario_id: str
    replicate: int
    seed: int
    pfddr: bool
    n_faulty: int
    fault_types: str
    blocks_excavated: int
    power_consumed_pct: float
    robots_depleted: int
    tunnel_depth_m: float
    detections: list[Detection] = field(default_factory=list)
    robots: list[RobotDiagnostics] = field(default_factory=list)
    mode_transitions: int = 0


class _Robot:
    __slots__ = (
        "id", "pose", "offset", "cmd", "achieved", "payload", "battery",
        "consumed", "recharged", "deg", "monitor", "controller", "mode",
        "failed", "depleted", "maint_queue", "maint_timer", "scan",
        "contacts", "peers", "linked", "handshake_bit", "excavate_block",
        "speed_accum", "last_second_speed",
    )

    def __init__(self, robot_id: int, pose: Pose, controller: RobotController,
                 monitor: PfddrMonitor):
        self.id = robot_id
        self.pose = pose
        self.offset: tuple[float, float] | None = (0.0, 0.0)
        self.cmd = STOP
        self.achieved = (0.0, 0.0)
        self.payload = 0.0
        self.battery = 1.0
        self.consumed = 0.0
        self.recharged = 0.0
        self.deg = DegradationState()
        self.monitor = monitor
        self.controller = controller
        self.mode = BehaviorMode.IN_ZONE_IDLE
        self.failed = False
        self.depleted = False
        self.maint_queue: list[FaultFlag] = []
        self.maint_timer = 0.0
        self.scan: list[tuple[float, int]] = [(1.0, 0)] * 7
        self.contacts: list = []
        self.peers: list[PeerState] = []
        self.linked = False
        self.handshake_bit: int | None = None
        self.excavate_block: tuple[int, int] | None = None
        self.speed_accum = 0.0
        self.last_second_speed = 0.0

    def believed(self) -> Pose | None:
        if self.offset is None:
            return None
        return Pose(self.pose.x + self.offset[0], self.pose.y + self.offset[1],
                    self.pose.theta)


def initial_poses(n_robots: int) -> list[Pose]:
    """Fixed deployment grid inside the zone, headings along the tunnel."""
    poses = []
    for i in range(n_robots):
        col, slot = divmod(i, 5)
        y = (slot - 2) * 0.4
        x = -1.2 + 0.35 * col
        poses.append(Pose(x, y, 0.0))
    return poses


class Simulation:
    """One replicate of one scenario."""

    def __init__(self, spec: ScenarioSpec, replicate: int,
                 check_invariants: bool = True, trace=None):
        spec.validate()
        self.spec = spec
        self.replicate = replicate
        self.constants = spec.constants
        self.check_invariants = check_invariants
        self.trace = trace
        self.grid = SoilGrid(self.constants)
        self.rng = RngStreams(spec.seed, replicate, spec.n_robots)
        self.plan = faults.resolve_plan(spec, self.rng.scenario)
        self.detections: list[Detection] = []
        self.mode_transitions = 0
        self.t = 0.0
        poses = initial_poses(spec.n_robots)
        self.robots = []
        for i in range(spec.n_robots):
            ctl = RobotController(i, (poses[i].x, poses[i].y), self.constants,
                                  self.rng.escape[i])
            self.robots.append(_Robot(i, poses[i], ctl, PfddrMonitor(self.constants)))

    # -- per-stage helpers -------------------------------------------------

    def _in_zone_true(self, robot: _Robot) -> bool:
        p = robot.pose
        return p.x < 0.0 and p.x >= -2.0 and abs(p.y) <= 1.0

    def _comms_snapshot(self) -> None:
        c = self.constants
        robots = self.robots
        positions = [(r.pose.x, r.pose.y) for r in robots]
        alive = [not r.failed for r in robots]
        emission = []
        for r in robots:
            if r.failed:
                emission.append(0.0)
            else:
                dc_eff = degradation.effective_dc(r.deg.dc_s, self.rng.loc_normal[r.id].next())
                emission.append(degradation.sensing_range(dc_eff, c.d_max))
        chain = comms.compute_chain(positions, alive, emission, c.d_max,
                                    c.chain_link_range)
        believed: list[tuple[float, float] | None] = [None] * len(robots)
        for r in robots:
            if r.failed:
                r.contacts = []
                r.offset = None
                continue
            buf = self.rng.loc_normal[r.id]
            n_peers = 1 + sum(1 for j, a in enumerate(alive) if a and j != r.id)
            draws = [buf.next() for _ in range(n_peers)]
            r.contacts = comms.ultrasonic_contacts(
                r.id, positions, alive, emission, c.d_max, draws)
            r.linked = chain.linked[r.id]
            mag = buf.next()
            direction = float(self.rng.localization[r.id].random())
            peer_linked = {j: chain.linked[j] for j in range(len(robots))}
            r.offset = comms.estimate_offset(r.contacts, peer_linked, mag, direction)
            if r.offset is not None:
                believed[r.id] = (positions[r.id][0] + r.offset[0],
                                  positions[r.id][1] + r.offset[1])
        # handshake bits and radio peer states use this snapshot's beliefs
        for r in robots:
            if r.failed:
                r.handshake_bit = None
                r.peers = []
                continue
            r.handshake_bit = comms.handshake_sample(
                r.id, positions, believed, alive, emission[r.id],
                c.chain_link_range)
            r.peers = [
                PeerState(j, believed[j][0], believed[j][1], chain.linked[j],
                          returning=(robots[j].controller.task is Task.RETURN
                                     or robots[j].payload > 1e-9),
                          outbound=(robots[j].controller.task is Task.TO_FACE
                                    and robots[j].payload <= 1e-9))
                for j in range(len(robots))
                if j != r.id and alive[j] and believed[j] is not None
            ]
        # proximity scans, held until the next snapshot
        for r in robots:
            if r.failed:
                continue
            others = [(o.pose.x, o.pose.y) for o in robots if o.id != r.id]
            r.scan = proximity_scan_kinds(r.pose, others, self.grid)
        self._frontier = self.grid.frontier_blocks()

    def _reachable_block(self, pose: Pose) -> tuple[int, int] | None:
        """Frontier block within manipulator reach of the true pose.

        Exposed blocks only (nothing in front of them); nearest face
        first, then nearest column centre, so a robot always digs what it
        is actually facing.
        """
        grid = self.grid
        best = None
        best_key = None
        for block in grid.frontier_blocks():
            face_x = grid.face_x + grid.block_size * block[0]
            col_y = grid.column_center_y(block[1])
            if not (face_x - _DIG_REACH_X <= pose.x <= face_x):
                continue
            dy = abs(pose.y - col_y)
            if dy > _DIG_REACH_Y:
                continue
            key = (face_x - pose.x, dy)
            if best_key is None or key < best_key:
                best, best_key = block, key
        return best

    def _promote_maintenance(self, robot: _Robot) -> None:
        ctl = robot.controller
        if (self.spec.pfddr_enabled and robot.monitor.flags
                and ctl.task in (Task.IDLE, Task.CHARGE)
                and self._in_zone_true(robot)):
            ctl.task = Task.MAINTAIN
            robot.maint_queue = [f for f in _MAINTENANCE_ORDER if f in robot.monitor.flags]
            robot.maint_timer = self.constants.maintenance_duration

    def _advance_maintenance(self, robot: _Robot, dt: float) -> None:
        robot.maint_timer -= dt
        if robot.maint_timer > 0.0:
            return
        category = robot.maint_queue.pop(0)
        robot.deg = complete_maintenance(robot.monitor, robot.deg, category,
                                         in_zone=self._in_zone_true(robot))
        if robot.maint_queue:
            robot.maint_timer = self.constants.maintenance_duration
        else:
            robot.controller.task = Task.IDLE
            robot.controller.return_reason = None

    # -- the tick ----------------------------------------------------------

    def tick(self, tick_index: int) -> None:
        c = self.constants
        dt = c.dt
        self.t = tick_index * dt
        robots = self.robots
        grid = self.grid

        # (1) fault injection on whole-second boundaries
        if tick_index % 100 == 0:
            for r in robots:
                if tick_index > 0:
                    r.last_second_speed = r.speed_accum * dt
                    r.speed_accum = 0.0
                if r.failed or r.controller.task is Task.MAINTAIN:
                    continue
                r.deg = faults.inject_second(self.plan.robots[r.id], r.deg,
                                             self.rng.injection[r.id])

        # (2) comms and perception snapshot at 10 Hz
        snapshot_tick = tick_index % 10 == 0
        if snapshot_tick:
            self._comms_snapshot()

        # (3) controller decisions
        flags_enabled = self.spec.pfddr_enabled
        for r in robots:
            if r.failed:
                r.cmd = STOP
                r.excavate_block = None
                continue
            self._promote_maintenance(r)
            believed = r.believed()
            ctx = ControlContext(
                t=self.t,
                believed=believed,
                battery=r.battery,
                payload=r.payload,
                scan=r.scan,
                contacts=r.contacts,
                peers=r.peers,
                linked=r.linked,
                flags=frozenset(r.monitor.flags) if flags_enabled else frozenset(),
                frontier=self._frontier,
                in_zone=believed is not None and believed.x < 0.0,
            )
            decision = r.controller.decide(ctx, grid, dt)
            r.cmd = decision.command
            r.excavate_block = decision.excavate_block
            if decision.mode is not r.mode:
                self.mode_transitions += 1
                r.mode = decision.mode

        # (4) physical output factors + excavation
        for r in robots:
            if r.failed:
                continue
            buf = self.rng.dc_noise[r.id]
            load_ratio = 1.0 + r.payload / c.robot_mass
            dl = degradation.effective_dc(r.deg.dc_l, buf.next())
            dr = degradation.effective_dc(r.deg.dc_r, buf.next())
            de = degradation.effective_dc(r.deg.dc_e, buf.next())
            fl = degradation.wheel_velocity_factor(dl, load_ratio, c.velocity_midpoint)
            fr = degradation.wheel_velocity_factor(dr, load_ratio, c.velocity_midpoint)
            r.achieved = (r.cmd.v_l * fl, r.cmd.v_r * fr)
            if r.excavate_block is not None:
                rate = degradation.excavation_rate(de, c.excavation_rate_max,
                                                   c.excavation_midpoint)
                # the manipulator works on whatever frontier block is
                # actually in front of the robot; the commanded block is
                # only the controller's (possibly mislocalized) intent
                block = self._reachable_block(r.pose)
                if block is not None:
                    budget = min(rate * dt, c.robot_mass - r.payload)
                    if budget > 0.0:
                        _, applied = grid.excavate(block, budget)
                        r.payload += applied

        # (5) kinematics + collision resolution
        for r in robots:
            al, ar = r.achieved
            if r.failed or (al == 0.0 and ar == 0.0):
                continue
            r.speed_accum += abs(0.5 * (al + ar))
            new = step_pose(r.pose, WheelCommand(al, ar), dt, c.wheel_base)
            obstacles = [(o.pose.x, o.pose.y) for o in robots if o.id != r.id]
            if position_free(new.x, new.y, grid, obstacles):
                r.pose = new
            else:
                r.pose = _truncate_move(r.pose, new, grid, obstacles)

        # (6) power accounting
        for r in robots:
            if r.failed:
                continue
            buf = self.rng.power[r.id]
            draws = (buf.next(), buf.next(), buf.next(), buf.next())
            load_ratio = 1.0 + r.payload / c.robot_mass
            rates = degradation.power_rates(
                r.deg, load_ratio,
                r.cmd.v_l != 0.0, r.cmd.v_r != 0.0,
                r.excavate_block is not None, draws)
            drawn = min(rates.total * dt, r.battery)
            r.consumed += drawn
            r.battery -= drawn
            # the zone recharges both waiting and in-service robots
            if (r.controller.task in (Task.CHARGE, Task.MAINTAIN)
                    and self._in_zone_true(r)):
                applied = min(c.recharge_rate * dt, 1.0 - r.battery)
                r.recharged += applied
                r.battery += applied
            # deposit is instantaneous on true zone entry
            if r.payload > 0.0 and self._in_zone_true(r):
                r.payload = 0.0
            # (7) depletion and failure
            if r.battery <= 1e-12:
                if self._in_zone_true(r):
                    if r.controller.task is not Task.MAINTAIN:
                        r.controller.task = Task.CHARGE
                else:
                    r.failed = True
                    r.depleted = True
                    r.cmd = STOP
                    r.achieved = (0.0, 0.0)
                    r.excavate_block = None
                    r.offset = None
                    r.mode = BehaviorMode.FAILED
                    self.mode_transitions += 1
                    continue
            # (8) PFDDR recording and detection
            if flags_enabled:
                n_wheels = (r.cmd.v_l != 0.0) + (r.cmd.v_r != 0.0)
                newly = r.monitor.accumulate_tick(
                    rates.wheel_left + rates.wheel_right, n_wheels,
                    r.payload > 1e-9, r.excavate_block is not None,
                    rates.excavation,
                    r.handshake_bit if snapshot_tick else None)
                for category in newly:
                    self.detections.append(Detection(
                        self.t, r.id, category.value,
                        dc_snapshot_at_detection(category, r.deg)))

        # (9) maintenance timers
        for r in robots:
            if not r.failed and r.controller.task is Task.MAINTAIN:
                self._advance_maintenance(r, dt)

        # (10) invariants and trace
        if self.check_invariants:
            self._check_invariants()
        if self.trace is not None and snapshot_tick:
            self._emit_trace()

    def _check_invariants(self) -> None:
        grid = self.grid
        robots = self.robots
        for r in robots:
            if abs(r.battery - (1.0 - r.consumed + r.recharged)) > 1e-9:
                raise InvariantViolation(f"energy accounting drift on robot {r.id}")
            d = distance_to_static(r.pose.x, r.pose.y, grid)
            if d < 0.10 - 1e-6:
                raise InvariantViolation(
                    f"robot {r.id} penetrates static geometry (clearance {d:.4f})")
        for i in range(len(robots)):
            for j in range(i + 1, len(robots)):
                dx = robots[i].pose.x - robots[j].pose.x
                dy = robots[i].pose.y - robots[j].pose.y
                if dx * dx + dy * dy < (0.20 - 1e-6) ** 2:
                    raise InvariantViolation(f"robots {i} and {j} overlap")
        removed = self.grid.total_mass_removed
        accounted = self.grid.mass_accounted()
        if abs(removed - accounted) > 1e-6:
            raise InvariantViolation("soil mass conservation violated")

    def _emit_trace(self) -> None:
        for r in self.robots:
            self.trace.write(
                f"{self.t:.2f},{r.id},{r.pose.x:.4f},{r.pose.y:.4f},"
                f"{r.pose.theta:.4f},{r.battery:.4f},{r.payload:.3f},"
                f"{r.mode.value},{r.deg.dc_s:.3f},{r.deg.dc_l:.3f},"
                f"{r.deg.dc_e:.3f}\n")

    # -- entry points ------------------------------------------------------

    def run(self) -> RunMetrics:
        n_ticks = int(round(self.constants.sim_duration * self.constants.tick_rate))
        for i in range(n_ticks):
            self.tick(i)
        spec = self.spec
        return RunMetrics(
            scenario_id=spec.scenario_id,
            replicate=self.replicate,
            seed=spec.seed,
            pfddr=spec.pfddr_enabled,
            n_faulty=spec.n_faulty,
            fault_types=spec.fault_types,
            blocks_excavated=self.grid.blocks_excavated,
            power_consumed_pct=100.0 * sum(r.consumed for r in self.robots)
            / self.constants.battery_capacity,
            robots_depleted=sum(1 for r in self.robots if r.depleted),
            tunnel_depth_m=self.grid.tunnel_depth(),
            detections=list(self.detections),
            robots=[RobotDiagnostics(
                final_dc=(r.deg.dc_s, r.deg.dc_l, r.deg.dc_r, r.deg.dc_e),
                final_battery=r.battery,
                depleted=r.depleted,
                last_second_speed=r.last_second_speed,
                final_mode=r.mode.value,
            ) for r in self.robots],
            mode_transitions=self.mode_transitions,
        )


def run_replicate(spec: ScenarioSpec, replicate: int,
                  check_invariants: bool = True, trace=None) -> RunMetrics:
    """Run one replicate to completion; bit-identical for identical inputs."""
    return Simulation(spec, replicate, check_invariants, trace).run()


def run_scenario(spec: ScenarioSpec, check_invariants: bool = True) -> list[RunMetrics]:
    """All replicates of a scenario, in replicate order."""
    return [run_replicate(spec, k, check_invariants) for k in range(spec.replicates)]
