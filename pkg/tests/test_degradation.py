"""Oracle tests for the degradation and power-consumption curves."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tunnelswarm.degradation import (
    DegradationState,
    EXCAVATION_RATE_NOMINAL,
    SENSING_RATE,
    WHEEL_RATE,
    curve_table,
    effective_dc,
    excavation_rate,
    power_multiplier,
    power_rates,
    sensing_range,
    wheel_velocity_factor,
    write_curve_csv,
)

TOL = 1e-9


class TestEffectiveDc:
    def test_zero_dc_is_noise_free(self):
        for draw in (-3.0, -1.0, 0.0, 1.0, 3.0):
            assert effective_dc(0.0, draw) == 0.0

    def test_positive_draw_scales_with_dc(self):
        assert effective_dc(1.0, 1.0) == pytest.approx(1.1, abs=TOL)

    def test_clamped_at_zero(self):
        assert effective_dc(0.5, -20.0) == 0.0

    def test_draw_statistics(self):
        # 1e5 standard-normal draws at dc=1: mean 1, std 0.1
        rng = np.random.Generator(np.random.PCG64(12345))
        draws = rng.standard_normal(100_000)
        vals = np.array([effective_dc(1.0, d) for d in draws])
        assert abs(vals.mean() - 1.0) < 0.002
        assert abs(vals.std() - 0.1) < 0.005

    @given(st.floats(0.0, 10.0), st.floats(-5.0, 5.0))
    def test_never_negative(self, dc, draw):
        assert effective_dc(dc, draw) >= 0.0


class TestSensingRange:
    def test_nominal(self):
        assert sensing_range(0.0) == pytest.approx(2.5, abs=TOL)

    def test_halfway_point(self):
        # d(dc) = 0.5 + 2*exp(-2*dc) = 2.0 at dc = -ln(0.75)/2
        dc = -math.log(0.75) / 2.0
        assert sensing_range(dc) == pytest.approx(2.0, abs=TOL)
        assert sensing_range(0.1438) == pytest.approx(2.0, abs=1e-3)

    def test_floor(self):
        # the curve decays to the 0.5 m floor asymptotically
        assert sensing_range(10.0) == pytest.approx(0.5, abs=1e-8)
        assert sensing_range(100.0) == 0.5

    @given(st.floats(0.0, 20.0))
    def test_bounded(self, dc):
        assert 0.5 <= sensing_range(dc) <= 2.5

    def test_monotone_non_increasing(self):
        grid = np.linspace(0.0, 5.0, 1000)
        vals = [sensing_range(dc) for dc in grid]
        assert all(a >= b - TOL for a, b in zip(vals, vals[1:]))


class TestWheelVelocityFactor:
    def test_unloaded_nominal(self):
        # 1 - sigmoid(10*(0 + 1 - 2.5)) = 1 - sigmoid(-15)
        expected = 1.0 - 1.0 / (1.0 + math.exp(15.0))
        assert wheel_velocity_factor(0.0, 1.0) == pytest.approx(expected, abs=TOL)
        assert wheel_velocity_factor(0.0, 1.0) == pytest.approx(0.9999997, abs=1e-7)

    def test_unloaded_midpoint(self):
        assert wheel_velocity_factor(1.5, 1.0) == pytest.approx(0.5, abs=TOL)

    def test_loaded_midpoint(self):
        assert wheel_velocity_factor(0.5, 2.0) == pytest.approx(0.5, abs=TOL)

    @given(st.floats(0.0, 5.0))
    def test_load_shift_identity(self, dc):
        # carrying a full load equals one extra unit of degradation
        assert wheel_velocity_factor(dc, 2.0) == pytest.approx(
            wheel_velocity_factor(dc + 1.0, 1.0), rel=1e-12, abs=1e-15)

    def test_load_shift_identity_exact_on_integers(self):
        for dc in (0.0, 0.5, 1.0, 1.5, 2.0):
            # dc + 1.0 is exact for these values, so the identity is exact too
            assert wheel_velocity_factor(dc, 2.0) == wheel_velocity_factor(dc + 1.0, 1.0)

    def test_monotone_non_increasing_in_dc(self):
        grid = np.linspace(0.0, 5.0, 1000)
        for ratio in (1.0, 1.5, 2.0):
            vals = [wheel_velocity_factor(dc, ratio) for dc in grid]
            assert all(a >= b - TOL for a, b in zip(vals, vals[1:]))

    @given(st.floats(0.0, 100.0), st.floats(1.0, 2.0))
    def test_bounded(self, dc, ratio):
        assert 0.0 <= wheel_velocity_factor(dc, ratio) <= 1.0


class TestExcavationRate:
    def test_nominal(self):
        expected = 0.2 * (1.0 - 1.0 / (1.0 + math.exp(15.0)))
        assert excavation_rate(0.0) == pytest.approx(expected, abs=TOL)
        assert excavation_rate(0.0) == pytest.approx(0.19999994, abs=1e-7)

    def test_midpoint(self):
        assert excavation_rate(1.5) == pytest.approx(0.1, abs=TOL)

    def test_deep_degradation(self):
        assert excavation_rate(4.0) < 1e-8

    def test_monotone_non_increasing(self):
        grid = np.linspace(0.0, 5.0, 1000)
        vals = [excavation_rate(dc) for dc in grid]
        assert all(a >= b - TOL for a, b in zip(vals, vals[1:]))


class TestPowerMultiplier:
    def test_nominal(self):
        assert power_multiplier(0.0) == pytest.approx(1.0, abs=TOL)

    def test_at_0_3(self):
        assert power_multiplier(0.3) == pytest.approx(2.0 - math.exp(-1.5), abs=TOL)
        assert power_multiplier(0.3) == pytest.approx(1.7769, abs=1e-4)

    def test_asymptote(self):
        assert power_multiplier(10.0) == pytest.approx(2.0, abs=1e-9)

    def test_monotone_non_decreasing(self):
        grid = np.linspace(0.0, 5.0, 1000)
        vals = [power_multiplier(dc) for dc in grid]
        assert all(a <= b + TOL for a, b in zip(vals, vals[1:]))

    @given(st.floats(0.0, 100.0))
    def test_bounded(self, dc):
        assert 1.0 <= power_multiplier(dc) < 2.0 + TOL


ZERO_DRAWS = (0.0, 0.0, 0.0, 0.0)


class TestPowerRates:
    def test_sensing_always_on(self):
        rates = power_rates(DegradationState(), 1.0, False, False, False, ZERO_DRAWS)
        assert rates.sensing == pytest.approx(SENSING_RATE, abs=TOL)
        assert rates.wheel_left == 0.0
        assert rates.wheel_right == 0.0
        assert rates.excavation == 0.0
        assert rates.total == pytest.approx(SENSING_RATE, abs=TOL)

    def test_loaded_left_wheel_degraded(self):
        # load ratio 2, multiplier(0.3): 2 * 1.77687 * 2.2e-3
        state = DegradationState(dc_l=0.3)
        rates = power_rates(state, 2.0, True, False, False, ZERO_DRAWS)
        expected = 2.0 * (2.0 - math.exp(-1.5)) * WHEEL_RATE
        assert rates.wheel_left == pytest.approx(expected, abs=TOL)
        assert rates.wheel_left == pytest.approx(7.818e-3, abs=1e-5)
        assert rates.wheel_right == 0.0

    def test_excavation_nominal(self):
        rates = power_rates(DegradationState(), 1.0, False, False, True, ZERO_DRAWS)
        assert rates.excavation == pytest.approx(EXCAVATION_RATE_NOMINAL, abs=TOL)

    def test_both_wheels_unloaded_nominal(self):
        rates = power_rates(DegradationState(), 1.0, True, True, False, ZERO_DRAWS)
        assert rates.wheel_left == pytest.approx(WHEEL_RATE, abs=TOL)
        assert rates.wheel_right == pytest.approx(WHEEL_RATE, abs=TOL)

    @given(
        st.floats(0.0, 5.0), st.floats(0.0, 5.0), st.floats(0.0, 5.0),
        st.floats(1.0, 2.0),
        st.tuples(st.floats(-4, 4), st.floats(-4, 4), st.floats(-4, 4),
                  st.floats(-4, 4)),
    )
    def test_rates_never_negative(self, dl, dr, de, ratio, draws):
        state = DegradationState(0.0, dl, dr, de)
        rates = power_rates(state, ratio, True, True, True, draws)
        assert rates.sensing >= 0.0
        assert rates.wheel_left >= 0.0
        assert rates.wheel_right >= 0.0
        assert rates.excavation >= 0.0


class TestCurveDump:
    def test_header_and_shape(self):
        import io
        buf = io.StringIO()
        write_curve_csv(buf, np.linspace(0.0, 2.0, 5))
        lines = buf.getvalue().splitlines()
        assert lines[0] == ("dc,sensing_range,velocity_factor_unloaded,"
                            "velocity_factor_loaded,excavation_factor,"
                            "power_multiplier")
        assert len(lines) == 6

    def test_table_values(self):
        rows = curve_table([0.0])
        dc, rng, vu, vl, ex, pm = rows[0]
        assert dc == 0.0
        assert rng == pytest.approx(2.5, abs=TOL)
        assert vu == pytest.approx(wheel_velocity_factor(0.0, 1.0), abs=TOL)
        assert vl == pytest.approx(wheel_velocity_factor(0.0, 2.0), abs=TOL)
        assert ex == pytest.approx(excavation_rate(0.0) / 0.2, abs=TOL)
        assert pm == pytest.approx(1.0, abs=TOL)
