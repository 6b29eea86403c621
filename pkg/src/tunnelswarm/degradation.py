"""Degradation and power-consumption models.

All functions are pure and stateless.  Degradation severity coefficients
(dc) are non-negative scalars per subsystem; noise enters either as a
multiplicative perturbation of dc (physical output curves) or as an
additive term on power rates.  Degraded output is expressed as
``max * (1 - lost_fraction)`` where the lost fraction is a steep sigmoid
in dc, so hardware always gets slower, never faster, as dc grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Nominal power rates at dc = 0, in units of battery capacity per second.
SENSING_RATE = 1.67e-4
SENSING_RATE_SIGMA = 1.67e-5
WHEEL_RATE = 2.2e-3          # per wheel, unloaded, before multipliers
WHEEL_RATE_SIGMA = 2.2e-4
EXCAVATION_RATE_NOMINAL = 0.02
EXCAVATION_RATE_SIGMA = 0.002

SENSING_RANGE_MAX = 2.5      # m
SENSING_RANGE_MIN = 0.5      # m

_exp = math.exp


@dataclass(frozen=True)
class DegradationState:
    """The four per-robot degradation severity coefficients."""

    dc_s: float = 0.0
    dc_l: float = 0.0
    dc_r: float = 0.0
    dc_e: float = 0.0


@dataclass(frozen=True)
class PowerRates:
    """Per-process power consumption rates, battery fraction per second."""

    sensing: float
    wheel_left: float
    wheel_right: float
    excavation: float

    @property
    def total(self) -> float:
        return self.sensing + self.wheel_left + self.wheel_right + self.excavation


def effective_dc(dc: float, standard_normal_draw: float) -> float:
    """Noisy coefficient: dc perturbed by N(0, 0.1*dc), clamped at zero."""
    return max(0.0, dc + standard_normal_draw * 0.1 * dc)


def sensing_range(dc_eff: float, d_max: float = SENSING_RANGE_MAX) -> float:
    """Ultrasonic transmission range in metres, floored at 0.5 m."""
    r = d_max - (2.0 - 2.0 * _exp(-2.0 * dc_eff))
    if r < SENSING_RANGE_MIN:
        return SENSING_RANGE_MIN
    if r > d_max:
        return d_max
    return r


def wheel_velocity_factor(dc_eff: float, load_ratio: float,
                          midpoint: float = 2.5) -> float:
    """Fraction of commanded wheel velocity actually achieved, in [0, 1].

    The payload shifts the curve: carrying a full load is equivalent to one
    extra unit of degradation.
    """
    x = 10.0 * (dc_eff + load_ratio - midpoint)
    if x > 60.0:
        return 0.0
    return 1.0 - 1.0 / (1.0 + _exp(-x))


def excavation_rate(dc_eff: float, rate_max: float = 0.2,
                    midpoint: float = 1.5) -> float:
    """Mass removed per second of excavation, decaying to zero with dc."""
    x = 10.0 * (dc_eff - midpoint)
    if x > 60.0:
        return 0.0
    return rate_max * (1.0 - 1.0 / (1.0 + _exp(-x)))


def power_multiplier(dc: float) -> float:
    """Consumption multiplier in [1, 2): degraded hardware draws more power."""
    return 2.0 - _exp(-5.0 * dc)


def power_rates(state: DegradationState, load_ratio: float,
                left_active: bool, right_active: bool, excavating: bool,
                noise_draws: tuple[float, float, float, float]) -> PowerRates:
    """Instantaneous power rates; inactive processes contribute zero.

    ``noise_draws`` are four standard-normal values consumed in the order
    (sensing, left wheel, right wheel, excavation).  Sensing is always on
    and unaffected by degradation; wheel rates scale with load ratio and
    the wheel's multiplier; all rates clamp at zero.
    """
    ds, dl, dr, de = noise_draws
    sensing = SENSING_RATE + ds * SENSING_RATE_SIGMA
    left = right = excav = 0.0
    if left_active:
        left = load_ratio * power_multiplier(state.dc_l) * WHEEL_RATE + dl * WHEEL_RATE_SIGMA
    if right_active:
        right = load_ratio * power_multiplier(state.dc_r) * WHEEL_RATE + dr * WHEEL_RATE_SIGMA
    if excavating:
        excav = power_multiplier(state.dc_e) * (EXCAVATION_RATE_NOMINAL + de * EXCAVATION_RATE_SIGMA)
    return PowerRates(
        sensing=max(0.0, sensing),
        wheel_left=max(0.0, left),
        wheel_right=max(0.0, right),
        excavation=max(0.0, excav),
    )


def curve_table(dc_values) -> list[tuple[float, float, float, float, float, float]]:
    """Noise-free curve samples over a dc grid, for the CSV curve dump.

    Columns: dc, sensing_range, velocity_factor_unloaded,
    velocity_factor_loaded, excavation_factor, power_multiplier.
    """
    rows = []
    for dc in dc_values:
        rows.append((
            float(dc),
            sensing_range(dc),
            wheel_velocity_factor(dc, 1.0),
            wheel_velocity_factor(dc, 2.0),
            excavation_rate(dc) / 0.2,
            power_multiplier(dc),
        ))
    return rows


def write_curve_csv(stream, dc_values) -> None:
    stream.write("dc,sensing_range,velocity_factor_unloaded,"
                 "velocity_factor_loaded,excavation_factor,power_multiplier\n")
    for row in curve_table(dc_values):
        stream.write(",".join(f"{v:.9g}" for v in row) + "\n")
