"""Deterministic tunnel-excavation swarm simulator.

A small team of differential-drive robots digs a corridor of soil blocks
while their sensing, locomotion and excavation hardware gradually degrades.
An optional on-board monitor detects the degradation from power and
communication signatures and routes robots back for maintenance.
"""

from .config import (
    ConfigError,
    FaultCategory,
    FaultChannel,
    PRESETS,
    ScenarioSpec,
    SimConstants,
    load_scenario,
    preset_combination,
    preset_ideal,
    preset_isolated_sweep,
    serialize_scenario,
    with_constants,
)
from .degradation import (
    DegradationState,
    PowerRates,
    effective_dc,
    excavation_rate,
    power_multiplier,
    power_rates,
    sensing_range,
    wheel_velocity_factor,
)
from .engine import (
    InvariantViolation,
    RunMetrics,
    Simulation,
    run_replicate,
    run_scenario,
)
from .experiments import run_specs, write_outputs
from .pfddr import FaultFlag, PfddrMonitor
from .world import SoilGrid

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegradationState",
    "FaultCategory",
    "FaultChannel",
    "FaultFlag",
    "InvariantViolation",
    "PRESETS",
    "PfddrMonitor",
    "PowerRates",
    "RunMetrics",
    "ScenarioSpec",
    "SimConstants",
    "Simulation",
    "SoilGrid",
    "effective_dc",
    "excavation_rate",
    "load_scenario",
    "power_multiplier",
    "power_rates",
    "preset_combination",
    "preset_ideal",
    "preset_isolated_sweep",
    "run_replicate",
    "run_scenario",
    "run_specs",
    "sensing_range",
    "serialize_scenario",
    "wheel_velocity_factor",
    "with_constants",
    "write_outputs",
    "__version__",
]
