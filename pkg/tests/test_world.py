"""Soil grid geometry, frontier computation and excavation bookkeeping."""

import math

import pytest
from hypothesis import given, strategies as st

from tunnelswarm.config import SimConstants
from tunnelswarm.world import (
    ExcavateResult,
    NotFrontierError,
    SoilGrid,
    Zone,
    distance_to_static,
    static_clearance,
    zone_of,
)


@pytest.fixture
def grid():
    return SoilGrid(SimConstants())


class TestGeometry:
    def test_dimensions(self, grid):
        assert grid.cols == 4
        assert grid.block_size == 0.2
        assert grid.face_x == 1.5
        assert grid.half_width == 0.4
        assert grid.block_mass == 1.0

    def test_column_centers(self, grid):
        assert [grid.column_center_y(c) for c in range(4)] == pytest.approx(
            [-0.3, -0.1, 0.1, 0.3])

    def test_cell_bounds(self, grid):
        assert grid.cell_bounds(0, 0) == pytest.approx((1.5, 1.7, -0.4, -0.2))
        assert grid.cell_bounds(2, 3) == pytest.approx((1.9, 2.1, 0.2, 0.4))

    def test_cell_at(self, grid):
        assert grid.cell_at(1.6, 0.1) == (0, 2)
        assert grid.cell_at(1.0, 0.0) is None      # before the face
        assert grid.cell_at(1.6, 0.5) is None      # outside the corridor


class TestFrontier:
    def test_fresh_face(self, grid):
        assert grid.frontier_blocks() == [(0, 0), (0, 1), (0, 2), (0, 3)]

    def test_after_one_removal(self, grid):
        result, applied = grid.excavate((0, 1), grid.block_mass)
        assert result is ExcavateResult.COMPLETED
        assert applied == pytest.approx(grid.block_mass)
        assert grid.frontier_blocks() == [(0, 0), (0, 2), (0, 3), (1, 1)]

    def test_occluded_block_rejected(self, grid):
        with pytest.raises(NotFrontierError):
            grid.excavate((1, 0), 0.1)

    def test_empty_block_rejected(self, grid):
        grid.excavate((0, 0), grid.block_mass)
        with pytest.raises(NotFrontierError):
            grid.excavate((0, 0), 0.1)

    def test_negative_mass_rejected(self, grid):
        with pytest.raises(ValueError):
            grid.excavate((0, 0), -0.1)


class TestExcavate:
    def test_five_second_dig(self, grid):
        # 0.2 mass/s for 5 s removes exactly one block
        for _ in range(499):
            result, applied = grid.excavate((0, 0), 0.2 * 0.01)
            assert result is ExcavateResult.IN_PROGRESS
            assert applied == pytest.approx(0.002)
        result, _ = grid.excavate((0, 0), 0.2 * 0.01)
        assert result is ExcavateResult.COMPLETED
        assert grid.blocks_excavated == 1

    def test_removal_capped_at_remaining_mass(self, grid):
        result, applied = grid.excavate((0, 2), 5.0)
        assert result is ExcavateResult.COMPLETED
        assert applied == pytest.approx(grid.block_mass)

    def test_mass_conservation(self, grid):
        grid.excavate((0, 0), 0.37)
        grid.excavate((0, 1), grid.block_mass)
        grid.excavate((1, 1), 0.11)
        assert grid.total_mass_removed == pytest.approx(grid.mass_accounted())

    @given(st.lists(st.tuples(st.integers(0, 3), st.floats(0.001, 0.4)),
                    min_size=1, max_size=60))
    def test_mass_conservation_property(self, digs):
        g = SoilGrid(SimConstants())
        for col, mass in digs:
            frontier = [b for b in g.frontier_blocks() if b[1] == col]
            g.excavate(frontier[0], mass)
        assert g.total_mass_removed == pytest.approx(g.mass_accounted())

    def test_tunnel_depth(self, grid):
        assert grid.tunnel_depth() == 0.0
        for col in range(4):
            grid.excavate((0, col), grid.block_mass)
        assert grid.tunnel_depth() == pytest.approx(0.2)
        # a partial second row does not count
        grid.excavate((1, 0), grid.block_mass)
        assert grid.tunnel_depth() == pytest.approx(0.2)


class TestZoneOf:
    def test_maintenance_zone(self, grid):
        assert zone_of(-1.0, 0.0, grid) is Zone.MAINTENANCE

    def test_corridor(self, grid):
        assert zone_of(1.0, 0.0, grid) is Zone.CORRIDOR

    def test_soil_is_solid(self, grid):
        assert zone_of(1.6, 0.1, grid) is Zone.SOLID

    def test_excavated_cell_becomes_excavation(self, grid):
        grid.excavate((0, 2), grid.block_mass)
        assert zone_of(1.6, 0.1, grid) is Zone.EXCAVATION

    def test_outside_world(self, grid):
        assert zone_of(-3.0, 0.0, grid) is Zone.SOLID
        assert zone_of(1.0, 0.6, grid) is Zone.SOLID


class TestStaticQueries:
    def test_clearance_to_face(self, grid):
        # forward ray from (1, 0) hits the face plane at x=1.5
        assert static_clearance(1.0, 0.0, 0.0, 0.0, grid) == pytest.approx(0.5)

    def test_clearance_to_wall(self, grid):
        # +90 deg ray from (0.5, 0) hits the corridor wall at y=0.4
        assert static_clearance(0.5, 0.0, 0.0, math.pi / 2, grid) == pytest.approx(0.4)

    def test_clearance_cap(self, grid):
        # backward ray from deep in the zone: nothing within 1 m
        assert static_clearance(-1.0, 0.0, 0.0, math.pi, grid) == pytest.approx(1.0)

    def test_distance_to_static_examples(self, grid):
        assert distance_to_static(-1.0, 0.0, grid) == pytest.approx(1.0)
        assert distance_to_static(1.0, 0.0, grid) == pytest.approx(0.4)
        assert distance_to_static(1.45, 0.0, grid) == pytest.approx(0.05)

    @given(st.floats(-1.9, 1.4), st.floats(-0.35, 0.35))
    def test_clearance_consistent_with_distance(self, x, y):
        g = SoilGrid(SimConstants())
        if zone_of(x, y, g) is Zone.SOLID:
            return
        d = distance_to_static(x, y, g)
        # no ray may report a static surface closer than the true distance
        for k in range(8):
            ang = k * math.pi / 4
            assert static_clearance(x, y, 0.0, ang, g) >= d - 1e-9
