"""The tunnel world: zone geometry, discrete soil blocks and static queries.

Coordinate frame: the tunnel reference point is (0, 0) on the boundary
between the maintenance/charging zone (x in [-2, 0]) and the tunnel
corridor (x >= 0).  Soil occupies the corridor from the excavation-zone
offset onward as a grid of square blocks; row 0 is the initial face and
rows extend in +x.
"""

from __future__ import annotations

import math
from enum import Enum

from .config import SimConstants

ZONE_X_MIN = -2.0
ZONE_HALF_HEIGHT = 1.0


class Zone(Enum):
    MAINTENANCE = "maintenance"
    CORRIDOR = "corridor"
    EXCAVATION = "excavation"
    SOLID = "solid"


class ExcavateResult(Enum):
    IN_PROGRESS = "in_progress"
    COMPLETED = "completed"


class NotFrontierError(ValueError):
    """Block is occluded, empty, or out of range."""


class SoilGrid:
    """Occupancy and remaining mass of the soil blocks ahead of the face.

    Cell (row r, col c) spans x in [x0 + s*r, x0 + s*(r+1)] and
    y in [-w/2 + s*c, -w/2 + s*(c+1)] where s is the block size, x0 the
    face offset and w the corridor width.  Removed cells never refill.
    """

    def __init__(self, constants: SimConstants | None = None, rows: int = 60):
        self.constants = constants or SimConstants()
        c = self.constants
        self.rows = rows
        self.cols = c.n_columns
        self.block_size = c.block_size
        self.face_x = c.excavation_zone_offset
        self.half_width = c.corridor_width / 2.0
        self.block_mass = c.robot_mass  # one block fills one robot payload
        # plain nested lists: cells are read one at a time on hot paths
        self.occupied = [[True] * self.cols for _ in range(rows)]
        self.mass = [[self.block_mass] * self.cols for _ in range(rows)]
        self._row_counts = [self.cols] * rows
        self._frontier: list[tuple[int, int]] | None = None
        self.blocks_excavated = 0
        self.total_mass_removed = 0.0

    # -- geometry helpers -------------------------------------------------

    def cell_bounds(self, row: int, col: int) -> tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max) of a cell."""
        s = self.block_size
        x0 = self.face_x + s * row
        y0 = -self.half_width + s * col
        return (x0, x0 + s, y0, y0 + s)

    def column_center_y(self, col: int) -> float:
        return -self.half_width + self.block_size * (col + 0.5)

    def cell_at(self, x: float, y: float) -> tuple[int, int] | None:
        if x < self.face_x or abs(y) > self.half_width:
            return None
        row = int((x - self.face_x) / self.block_size)
        col = int((y + self.half_width) / self.block_size)
        if row >= self.rows or col >= self.cols:
            return None
        return (row, col)

    # -- queries ----------------------------------------------------------

    def is_occupied(self, row: int, col: int) -> bool:
        if 0 <= row < self.rows and 0 <= col < self.cols:
            return self.occupied[row][col]
        return False

    def frontier_blocks(self) -> list[tuple[int, int]]:
        """Occupied cells exposed toward the entrance, sorted by (row, col)."""
        if self._frontier is not None:
            return self._frontier
        out = []
        occ = self.occupied
        # cells below the deepest empty cell are fully occluded
        last = self.rows - 1
        for row in range(self.rows - 1, -1, -1):
            if self._row_counts[row] < self.cols:
                last = min(self.rows - 1, row + 1)
                break
        else:
            last = 0
        for row in range(last + 1):
            for col in range(self.cols):
                if occ[row][col] and (row == 0 or not occ[row - 1][col]):
                    out.append((row, col))
        self._frontier = out
        return out

    def tunnel_depth(self) -> float:
        """Depth in metres: leading fully-empty rows times the block size."""
        depth_rows = 0
        for row in range(self.rows):
            if self._row_counts[row] > 0:
                break
            depth_rows += 1
        return depth_rows * self.block_size

    # -- mutation ---------------------------------------------------------

    def excavate(self, block: tuple[int, int], mass_removed: float) -> tuple[ExcavateResult, float]:
        """Remove up to ``mass_removed`` from a frontier block.

        Returns the progress state and the mass actually removed (limited
        by what is left in the cell).
        """
        row, col = block
        if not self.is_occupied(row, col) or (row > 0 and self.occupied[row - 1][col]):
            raise NotFrontierError(f"block {block} is not on the frontier")
        if mass_removed < 0:
            raise ValueError("mass_removed must be non-negative")
        applied = min(float(mass_removed), self.mass[row][col])
        self.mass[row][col] -= applied
        self.total_mass_removed += applied
        if self.mass[row][col] <= 1e-12:
            self.mass[row][col] = 0.0
            self.occupied[row][col] = False
            self._row_counts[row] -= 1
            self._frontier = None
            self.blocks_excavated += 1
            return (ExcavateResult.COMPLETED, applied)
        return (ExcavateResult.IN_PROGRESS, applied)

    def mass_accounted(self) -> float:
        """Completed-block mass plus partial removals still pending in cells."""
        partial = 0.0
        occ = self.occupied
        for row in range(self.rows):
            for col in range(self.cols):
                if occ[row][col] and self.mass[row][col] < self.block_mass:
                    partial += self.block_mass - self.mass[row][col]
        return self.blocks_excavated * self.block_mass + partial

    def raster(self) -> str:
        """Text raster: '#' occupied, '=' partially dug, '.' empty.

        One line per row, entrance at the top.
        """
        lines = []
        for row in range(self.rows):
            chars = []
            for col in range(self.cols):
                if not self.occupied[row][col]:
                    chars.append(".")
                elif self.mass[row][col] < self.block_mass:
                    chars.append("=")
                else:
                    chars.append("#")
            lines.append("".join(chars))
        return "\n".join(lines)


def zone_of(x: float, y: float, grid: SoilGrid) -> Zone:
    """Classify a point; boundaries are half-open toward +x."""
    if x < 0.0:
        if x >= ZONE_X_MIN and abs(y) <= ZONE_HALF_HEIGHT:
            return Zone.MAINTENANCE
        return Zone.SOLID
    if abs(y) > grid.half_width:
        return Zone.SOLID
    cell = grid.cell_at(x, y)
    if cell is not None and grid.is_occupied(*cell):
        return Zone.SOLID
    if x >= grid.face_x:
        return Zone.EXCAVATION
    return Zone.CORRIDOR


def distance_to_static(x: float, y: float, grid: SoilGrid) -> float:
    """Distance from a free-space point to the nearest wall or soil surface."""
    w = grid.half_width
    best = math.inf
    if x < 0.0:
        # zone walls
        best = min(best, x - ZONE_X_MIN, ZONE_HALF_HEIGHT - abs(y))
        # the x=0 wall segments at |y| in [w, 1]
        if abs(y) >= w:
            best = min(best, -x)
        else:
            best = min(best, math.hypot(x, w - abs(y)))
    else:
        best = min(best, w - abs(y))
        # entrance corner points (0, +-w) seen from inside the corridor
        if x < 0.3:
            best = min(best, math.hypot(x, w - abs(y)))
        # nearby soil cells
        s = grid.block_size
        if x > grid.face_x - 0.5:
            r_lo = max(0, int((x - 0.35 - grid.face_x) / s))
            r_hi = min(grid.rows - 1, int((x + 0.35 - grid.face_x) / s))
            for row in range(r_lo, r_hi + 1):
                for col in range(grid.cols):
                    if grid.occupied[row][col]:
                        x0, x1, y0, y1 = grid.cell_bounds(row, col)
                        dx = max(x0 - x, 0.0, x - x1)
                        dy = max(y0 - y, 0.0, y - y1)
                        best = min(best, math.hypot(dx, dy))
    return best


def _ray_to_vertical(px, py, dx, dy, wall_x, y_lo, y_hi):
    if abs(dx) < 1e-12:
        return math.inf
    t = (wall_x - px) / dx
    if t <= 0:
        return math.inf
    yy = py + t * dy
    return t if y_lo <= yy <= y_hi else math.inf


def _ray_to_horizontal(px, py, dx, dy, wall_y, x_lo, x_hi):
    if abs(dy) < 1e-12:
        return math.inf
    t = (wall_y - py) / dy
    if t <= 0:
        return math.inf
    xx = px + t * dx
    return t if x_lo <= xx <= x_hi else math.inf


def _ray_to_aabb(px, py, dx, dy, x0, x1, y0, y1):
    # slab method; returns entry distance or inf
    tmin, tmax = 0.0, math.inf
    for p, d, lo, hi in ((px, dx, x0, x1), (py, dy, y0, y1)):
        if abs(d) < 1e-12:
            if p < lo or p > hi:
                return math.inf
        else:
            t1 = (lo - p) / d
            t2 = (hi - p) / d
            if t1 > t2:
                t1, t2 = t2, t1
            tmin = max(tmin, t1)
            tmax = min(tmax, t2)
            if tmin > tmax:
                return math.inf
    return tmin


def static_clearance(x: float, y: float, heading: float, ray_angle: float,
                     grid: SoilGrid, cap: float = 1.0) -> float:
    """Distance along a sensor ray to the nearest static surface, capped."""
    ang = heading + ray_angle
    dx, dy = math.cos(ang), math.sin(ang)
    w = grid.half_width
    best = cap
    # corridor walls
    best = min(best, _ray_to_horizontal(x, y, dx, dy, w, 0.0, math.inf))
    best = min(best, _ray_to_horizontal(x, y, dx, dy, -w, 0.0, math.inf))
    # zone walls
    best = min(best, _ray_to_horizontal(x, y, dx, dy, ZONE_HALF_HEIGHT, ZONE_X_MIN, 0.0))
    best = min(best, _ray_to_horizontal(x, y, dx, dy, -ZONE_HALF_HEIGHT, ZONE_X_MIN, 0.0))
    best = min(best, _ray_to_vertical(x, y, dx, dy, ZONE_X_MIN, -ZONE_HALF_HEIGHT, ZONE_HALF_HEIGHT))
    best = min(best, _ray_to_vertical(x, y, dx, dy, 0.0, w, ZONE_HALF_HEIGHT))
    best = min(best, _ray_to_vertical(x, y, dx, dy, 0.0, -ZONE_HALF_HEIGHT, -w))
    # soil cells within reach of the ray
    s = grid.block_size
    x_far = x + dx * min(best, cap)
    if max(x, x_far) >= grid.face_x:
        r_lo = max(0, int((min(x, x_far) - grid.face_x) / s))
        r_hi = min(grid.rows - 1, int((max(x, x_far) - grid.face_x) / s) + 1)
        for row in range(r_lo, r_hi + 1):
            for col in range(grid.cols):
                if grid.occupied[row][col]:
                    x0, x1, y0, y1 = grid.cell_bounds(row, col)
                    t = _ray_to_aabb(x, y, dx, dy, x0, x1, y0, y1)
                    if t < best:
                        best = t
    return min(best, cap)
