"""Model constants, fault channels and scenario definitions.

Scenarios are described in TOML.  Unknown keys are rejected (fail-closed) so
that a typo in a config file cannot silently fall back to a default.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from enum import Enum

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    """Malformed or invalid scenario/configuration document."""


@dataclass(frozen=True)
class SimConstants:
    """Physical and behavioural constants of the model.

    All masses are in units of the robot mass, all energies in units of the
    battery capacity.  Defaults encode a 5-robot, 900 s desk-scale run.
    """

    robot_mass: float = 1.0            # M_R
    battery_capacity: float = 1.0      # P_0
    v_max: float = 0.22                # m/s
    d_max: float = 2.5                 # m, max ultrasonic transmission range
    excavation_rate_max: float = 0.2   # mass/s (0.2 * M_R)
    tick_rate: float = 100.0           # Hz
    sim_duration: float = 900.0        # s
    recharge_rate: float = 0.10        # fraction of P_0 per second
    charge_cutoff: float = 0.30        # battery fraction triggering return
    maintenance_duration: float = 5.0  # s per fault category
    corridor_width: float = 0.8        # m
    excavation_zone_offset: float = 1.5  # m, corridor start to soil face
    chain_link_range: float = 2.0      # m
    spacing_distance: float = 1.0      # m
    avoid_distance: float = 0.5        # m
    radio_range: float = 50.0          # m
    block_size: float = 0.2            # m
    wheel_base: float = 0.16           # m
    robot_radius: float = 0.10         # m
    velocity_midpoint: float = 2.5     # K_v
    excavation_midpoint: float = 1.5   # K_E
    threshold_multiplier: float = 1.5  # detection threshold over nominal rate

    def validate(self) -> None:
        positive = (
            "robot_mass", "battery_capacity", "v_max", "d_max",
            "excavation_rate_max", "tick_rate", "sim_duration",
            "recharge_rate", "maintenance_duration", "corridor_width",
            "excavation_zone_offset", "chain_link_range", "spacing_distance",
            "avoid_distance", "radio_range", "block_size", "wheel_base",
            "robot_radius", "velocity_midpoint", "excavation_midpoint",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigError(f"constants.{name} must be strictly positive")
        if not 0.0 < self.charge_cutoff < 1.0:
            raise ConfigError("constants.charge_cutoff must be in (0, 1)")
        if not 1.0 < self.threshold_multiplier < 2.0:
            raise ConfigError("constants.threshold_multiplier must be in (1, 2)")
        cols = self.corridor_width / self.block_size
        if abs(cols - round(cols)) > 1e-9:
            raise ConfigError(
                "constants.corridor_width must be an integer multiple of constants.block_size"
            )

    @property
    def n_columns(self) -> int:
        return int(round(self.corridor_width / self.block_size))

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate


class FaultCategory(Enum):
    SENSING = "sensing"
    MOTOR_LEFT = "motor_left"
    MOTOR_RIGHT = "motor_right"
    EXCAVATION = "excavation"


@dataclass(frozen=True)
class FaultChannel:
    """One stochastic degradation channel on one robot."""

    category: FaultCategory
    rate: float              # per-second Bernoulli increment probability
    increment: float = 0.01  # dc added on success

    def validate(self, where: str) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise ConfigError(f"{where}.rate must be in [0, 1]")
        if not self.increment > 0:
            raise ConfigError(f"{where}.increment must be strictly positive")


@dataclass(frozen=True)
class ScenarioSpec:
    """A complete experiment definition: fault plan, PFDDR toggle, seeding."""

    scenario_id: str
    n_robots: int = 5
    pfddr_enabled: bool = False
    fault_plan: tuple[tuple[FaultChannel, ...], ...] = ()
    combination_mode: bool = False
    seed: int = 1
    replicates: int = 10
    constants: SimConstants = field(default_factory=SimConstants)

    def validate(self) -> None:
        self.constants.validate()
        if self.n_robots < 1:
            raise ConfigError("scenario.n_robots must be at least 1")
        if self.replicates < 1:
            raise ConfigError("scenario.replicates must be at least 1")
        if len(self.fault_plan) > self.n_robots:
            raise ConfigError("scenario.robot entries exceed scenario.n_robots")
        for i, channels in enumerate(self.fault_plan):
            for j, ch in enumerate(channels):
                ch.validate(f"scenario.robot[{i}].fault[{j}]")

    def channels_for(self, robot_id: int) -> tuple[FaultChannel, ...]:
        if robot_id < len(self.fault_plan):
            return self.fault_plan[robot_id]
        return ()

    @property
    def n_faulty(self) -> int:
        return sum(1 for channels in self.fault_plan if channels)

    @property
    def fault_types(self) -> str:
        kinds: list[str] = []
        for channels in self.fault_plan:
            for ch in channels:
                kind = ch.category.value
                if kind in ("motor_left", "motor_right"):
                    kind = "motor"
                if kind not in kinds:
                    kinds.append(kind)
        order = ["sensing", "motor", "excavation"]
        return "+".join(sorted(kinds, key=order.index))


_CONSTANT_KEYS = {f: f for f in SimConstants.__dataclass_fields__}
_SCENARIO_KEYS = {
    "scenario_id", "n_robots", "pfddr", "combination_mode", "seed",
    "replicates", "robot",
}
_FAULT_KEYS = {"category", "rate", "increment", "increment_probability"}

_CATEGORY_ALIASES = {
    "sensing": (FaultCategory.SENSING,),
    "motor_left": (FaultCategory.MOTOR_LEFT,),
    "motor_right": (FaultCategory.MOTOR_RIGHT,),
    "motor": (FaultCategory.MOTOR_LEFT, FaultCategory.MOTOR_RIGHT),
    "excavation": (FaultCategory.EXCAVATION,),
}


def _reject_unknown(table: dict, allowed: set, where: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {where}.{key}")


def load_scenario(text: str) -> ScenarioSpec:
    """Parse a TOML scenario document into a validated :class:`ScenarioSpec`."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc

    _reject_unknown(doc, {"constants", "scenario"}, "")
    const_table = doc.get("constants", {})
    _reject_unknown(const_table, set(_CONSTANT_KEYS), "constants")
    constants = SimConstants(**const_table)

    scen = doc.get("scenario", {})
    _reject_unknown(scen, _SCENARIO_KEYS, "scenario")
    if "scenario_id" not in scen:
        raise ConfigError("scenario.scenario_id is required")

    fault_plan: list[tuple[FaultChannel, ...]] = []
    for i, robot_table in enumerate(scen.get("robot", [])):
        _reject_unknown(robot_table, {"fault"}, f"scenario.robot[{i}]")
        channels: list[FaultChannel] = []
        for j, fault_table in enumerate(robot_table.get("fault", [])):
            where = f"scenario.robot[{i}].fault[{j}]"
            _reject_unknown(fault_table, _FAULT_KEYS, where)
            if "rate" in fault_table and "increment_probability" in fault_table:
                raise ConfigError(f"{where}: give rate or increment_probability, not both")
            rate = fault_table.get("rate", fault_table.get("increment_probability"))
            if rate is None:
                raise ConfigError(f"{where}.rate is required")
            name = fault_table.get("category")
            if name not in _CATEGORY_ALIASES:
                raise ConfigError(f"{where}.category must be one of {sorted(_CATEGORY_ALIASES)}")
            for category in _CATEGORY_ALIASES[name]:
                channels.append(FaultChannel(
                    category=category,
                    rate=float(rate),
                    increment=float(fault_table.get("increment", 0.01)),
                ))
        fault_plan.append(tuple(channels))

    spec = ScenarioSpec(
        scenario_id=str(scen["scenario_id"]),
        n_robots=int(scen.get("n_robots", 5)),
        pfddr_enabled=bool(scen.get("pfddr", False)),
        fault_plan=tuple(fault_plan),
        combination_mode=bool(scen.get("combination_mode", False)),
        seed=int(scen.get("seed", 1)),
        replicates=int(scen.get("replicates", 10)),
        constants=constants,
    )
    spec.validate()
    if spec.combination_mode:
        # rates in the document are ignored in combination mode, but must
        # still be plausible placeholders
        for i, channels in enumerate(spec.fault_plan):
            for j, ch in enumerate(channels):
                if not 0.0 <= ch.rate <= 0.15:
                    raise ConfigError(
                        f"scenario.robot[{i}].fault[{j}].rate must be in [0.01, 0.15] "
                        "in combination mode"
                    )
    return spec


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_scenario(spec: ScenarioSpec) -> str:
    """Emit a TOML document that :func:`load_scenario` parses back identically."""
    lines = ["[constants]"]
    for name in SimConstants.__dataclass_fields__:
        lines.append(f"{name} = {_toml_value(getattr(spec.constants, name))}")
    lines += [
        "",
        "[scenario]",
        f"scenario_id = {_toml_value(spec.scenario_id)}",
        f"n_robots = {spec.n_robots}",
        f"pfddr = {_toml_value(spec.pfddr_enabled)}",
        f"combination_mode = {_toml_value(spec.combination_mode)}",
        f"seed = {spec.seed}",
        f"replicates = {spec.replicates}",
    ]
    for channels in spec.fault_plan:
        lines += ["", "[[scenario.robot]]"]
        for ch in channels:
            lines += [
                "",
                "[[scenario.robot.fault]]",
                f"category = {_toml_value(ch.category.value)}",
                f"rate = {_toml_value(ch.rate)}",
                f"increment = {_toml_value(ch.increment)}",
            ]
    return "\n".join(lines) + "\n"


def _all_channel_plan(n_robots: int, rate: float) -> tuple[tuple[FaultChannel, ...], ...]:
    channels = tuple(FaultChannel(cat, rate) for cat in FaultCategory)
    return tuple(channels for _ in range(n_robots))


def preset_ideal(seed: int = 1, replicates: int = 10) -> list[ScenarioSpec]:
    """Fault-free control scenario."""
    return [ScenarioSpec(scenario_id="ideal", seed=seed, replicates=replicates)]


def preset_isolated_sweep(fault: str, pfddr: bool, seed: int = 1,
                          replicates: int = 10, rate: float = 0.15) -> list[ScenarioSpec]:
    """The 6-point sweep: 0..5 afflicted robots, one fault type in isolation."""
    if fault not in ("sensing", "motor", "excavation"):
        raise ConfigError(f"unknown sweep fault type: {fault}")
    specs = []
    tag = "on" if pfddr else "off"
    for k in range(6):
        channels = tuple(FaultChannel(cat, rate) for cat in _CATEGORY_ALIASES[fault])
        plan = tuple(channels for _ in range(k))
        specs.append(ScenarioSpec(
            scenario_id=f"sweep-{fault}-{tag}-k{k}",
            pfddr_enabled=pfddr,
            fault_plan=plan,
            seed=seed,
            replicates=replicates,
        ))
    return specs


def preset_combination(pfddr: bool, seed: int = 1, replicates: int = 10) -> list[ScenarioSpec]:
    """All fault types on every robot; rates drawn in [0.01, 0.15] at run time."""
    tag = "on" if pfddr else "off"
    return [ScenarioSpec(
        scenario_id=f"combo-{tag}",
        pfddr_enabled=pfddr,
        fault_plan=_all_channel_plan(5, 0.15),
        combination_mode=True,
        seed=seed,
        replicates=replicates,
    )]


PRESETS = {
    "ideal": lambda seed, replicates: preset_ideal(seed, replicates),
    "combo-pfddr-on": lambda seed, replicates: preset_combination(True, seed, replicates),
    "combo-pfddr-off": lambda seed, replicates: preset_combination(False, seed, replicates),
}


def with_constants(spec: ScenarioSpec, **overrides) -> ScenarioSpec:
    """Copy of *spec* with some constants replaced (test/desk-scale helper)."""
    return replace(spec, constants=replace(spec.constants, **overrides))
