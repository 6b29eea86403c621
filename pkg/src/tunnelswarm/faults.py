"""Stochastic growth of degradation severity coefficients."""

from __future__ import annotations

from dataclasses import dataclass

from .config import FaultCategory, FaultChannel, ScenarioSpec
from .degradation import DegradationState

COMBINATION_RATE_MIN = 0.01
COMBINATION_RATE_MAX = 0.15


@dataclass(frozen=True)
class ResolvedChannel:
    category: FaultCategory
    rate: float
    increment: float
    shared_motor: bool = False  # one draw increments both wheels


@dataclass(frozen=True)
class InjectionPlan:
    """Per-robot channels with rates fixed for the whole run."""

    robots: tuple[tuple[ResolvedChannel, ...], ...]


def _resolve_robot(channels: tuple[FaultChannel, ...], rng=None) -> tuple[ResolvedChannel, ...]:
    by_cat = {ch.category: ch for ch in channels}
    out: list[ResolvedChannel] = []
    left = by_cat.get(FaultCategory.MOTOR_LEFT)
    right = by_cat.get(FaultCategory.MOTOR_RIGHT)

    def rate_of(ch: FaultChannel) -> float:
        if rng is None:
            return ch.rate
        return float(rng.uniform(COMBINATION_RATE_MIN, COMBINATION_RATE_MAX))

    for cat in (FaultCategory.SENSING, FaultCategory.EXCAVATION):
        if cat in by_cat:
            ch = by_cat[cat]
            out.append(ResolvedChannel(cat, rate_of(ch), ch.increment))
    if left and right and left.rate == right.rate and left.increment == right.increment:
        # a single motor fault afflicts the whole locomotion subsystem
        out.append(ResolvedChannel(FaultCategory.MOTOR_LEFT, rate_of(left),
                                   left.increment, shared_motor=True))
    else:
        for ch in (left, right):
            if ch is not None:
                out.append(ResolvedChannel(ch.category, rate_of(ch), ch.increment))
    return tuple(out)


def resolve_plan(spec: ScenarioSpec, scenario_rng=None) -> InjectionPlan:
    """Fix per-robot rates at scenario start.

    In combination mode each channel's rate is drawn uniformly from
    [0.01, 0.15] using ``scenario_rng``; robots are resolved in id order
    so the draw sequence is reproducible.
    """
    rng = scenario_rng if spec.combination_mode else None
    robots = []
    for i in range(spec.n_robots):
        robots.append(_resolve_robot(spec.channels_for(i), rng))
    return InjectionPlan(tuple(robots))


def inject_second(channels: tuple[ResolvedChannel, ...], state: DegradationState,
                  rng) -> DegradationState:
    """One whole-second injection step for one robot.

    One Bernoulli draw per channel in plan order; a shared motor channel
    increments both wheel coefficients from a single draw.
    """
    dc_s, dc_l, dc_r, dc_e = state.dc_s, state.dc_l, state.dc_r, state.dc_e
    for ch in channels:
        if ch.rate <= 0.0:
            continue
        if rng.random() >= ch.rate:
            continue
        if ch.shared_motor:
            dc_l += ch.increment
            dc_r += ch.increment
        elif ch.category is FaultCategory.SENSING:
            dc_s += ch.increment
        elif ch.category is FaultCategory.MOTOR_LEFT:
            dc_l += ch.increment
        elif ch.category is FaultCategory.MOTOR_RIGHT:
            dc_r += ch.increment
        else:
            dc_e += ch.increment
    return DegradationState(dc_s, dc_l, dc_r, dc_e)
