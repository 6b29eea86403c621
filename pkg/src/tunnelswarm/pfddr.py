"""Predictive fault detection and diagnosis via median-thresholded sample arrays.

Six fixed-capacity arrays per robot: a handshake-bit array for sensing,
a power array for excavation, and four power arrays for locomotion (one
or both wheels active, loaded or unloaded).  Samples are 10-tick means
recorded at 10 Hz; an array holds 50 samples, i.e. 5 s of activity that
need not be consecutive.  A category is flagged when the median of its
full array exceeds its threshold; flags are sticky until maintenance.
"""

from __future__ import annotations

from collections import deque
from enum import Enum

from .config import SimConstants
from .degradation import (
    DegradationState,
    EXCAVATION_RATE_NOMINAL,
    WHEEL_RATE,
)

ARRAY_CAPACITY = 50
WINDOW_TICKS = 10


class FaultFlag(Enum):
    SENSING = "sensing"
    MOTOR = "motor"
    EXCAVATION = "excavation"


LOCO_KEYS = ((1, False), (2, False), (1, True), (2, True))


def nominal_locomotion_rate(n_wheels: int, loaded: bool) -> float:
    """Expected healthy power rate for a locomotion activity configuration."""
    ratio = 2.0 if loaded else 1.0
    return n_wheels * ratio * WHEEL_RATE


def median(values) -> float:
    """Median with the even-length convention: mean of the two middle values."""
    s = sorted(values)
    n = len(s)
    if n == 0:
        raise ValueError("median of empty array")
    mid = n // 2
    if n % 2:
        return float(s[mid])
    return 0.5 * (s[mid - 1] + s[mid])


def dc_snapshot_at_detection(category: FaultFlag, state: DegradationState) -> float:
    """The coefficient reported when a flag first raises."""
    if category is FaultFlag.SENSING:
        return state.dc_s
    if category is FaultFlag.MOTOR:
        return max(state.dc_l, state.dc_r)
    return state.dc_e


class PfddrMonitor:
    """Per-robot detection/diagnosis state machine."""

    def __init__(self, constants: SimConstants | None = None):
        c = constants or SimConstants()
        m = c.threshold_multiplier
        self.loco_arrays = {key: deque(maxlen=ARRAY_CAPACITY) for key in LOCO_KEYS}
        self.loco_thresholds = {
            key: m * nominal_locomotion_rate(*key) for key in LOCO_KEYS
        }
        self.excavation_array: deque = deque(maxlen=ARRAY_CAPACITY)
        self.excavation_threshold = m * EXCAVATION_RATE_NOMINAL
        self.sensing_array: deque = deque(maxlen=ARRAY_CAPACITY)
        self.flags: set[FaultFlag] = set()
        # 10-tick accumulation window
        self._win_count = 0
        self._win_loco_sum = 0.0
        self._win_excav_sum = 0.0
        self._win_config: tuple[int, bool, bool] | None = None
        self._win_mixed = False

    # -- recording --------------------------------------------------------

    def accumulate_tick(self, loco_rate: float, n_wheels_active: int,
                        loaded: bool, excavating: bool, excavation_rate: float,
                        handshake_bit: int | None = None) -> list[FaultFlag]:
        """Feed one 100 Hz tick; returns categories newly flagged.

        A completed 10-tick window pushes its mean into exactly one
        locomotion array (and the excavation array when excavating),
        provided the activity configuration was constant; mixed windows
        are discarded.  Handshake bits bypass the window and push at the
        caller's 10 Hz sampling rate.
        """
        newly: list[FaultFlag] = []
        if handshake_bit is not None and FaultFlag.SENSING not in self.flags:
            self.sensing_array.append(handshake_bit)
            if self._detect_sensing():
                newly.append(FaultFlag.SENSING)

        config = (n_wheels_active, loaded, excavating)
        if self._win_config is None:
            self._win_config = config
        elif config != self._win_config:
            self._win_mixed = True
        self._win_loco_sum += loco_rate
        self._win_excav_sum += excavation_rate
        self._win_count += 1
        if self._win_count == WINDOW_TICKS:
            if not self._win_mixed:
                n_wheels, was_loaded, was_excavating = self._win_config
                if n_wheels >= 1 and FaultFlag.MOTOR not in self.flags:
                    arr = self.loco_arrays[(n_wheels, was_loaded)]
                    arr.append(self._win_loco_sum / WINDOW_TICKS)
                    if self._detect_loco((n_wheels, was_loaded)):
                        newly.append(FaultFlag.MOTOR)
                if was_excavating and FaultFlag.EXCAVATION not in self.flags:
                    self.excavation_array.append(self._win_excav_sum / WINDOW_TICKS)
                    if self._detect_excavation():
                        newly.append(FaultFlag.EXCAVATION)
            self._win_count = 0
            self._win_loco_sum = 0.0
            self._win_excav_sum = 0.0
            self._win_config = None
            self._win_mixed = False
        return newly

    # -- detection --------------------------------------------------------

    def _detect_sensing(self) -> bool:
        if len(self.sensing_array) == ARRAY_CAPACITY and median(self.sensing_array) > 0:
            self.flags.add(FaultFlag.SENSING)
            return True
        return False

    def _detect_loco(self, key) -> bool:
        arr = self.loco_arrays[key]
        if len(arr) == ARRAY_CAPACITY and median(arr) > self.loco_thresholds[key]:
            self.flags.add(FaultFlag.MOTOR)
            return True
        return False

    def _detect_excavation(self) -> bool:
        arr = self.excavation_array
        if len(arr) == ARRAY_CAPACITY and median(arr) > self.excavation_threshold:
            self.flags.add(FaultFlag.EXCAVATION)
            return True
        return False

    def detect(self) -> set[FaultFlag]:
        """Evaluate every full array; returns the current flag set."""
        self._detect_sensing()
        for key in LOCO_KEYS:
            self._detect_loco(key)
        self._detect_excavation()
        return set(self.flags)

    # -- recovery ---------------------------------------------------------

    def clear_category(self, category: FaultFlag) -> None:
        if category is FaultFlag.SENSING:
            self.sensing_array.clear()
        elif category is FaultFlag.MOTOR:
            for arr in self.loco_arrays.values():
                arr.clear()
        else:
            self.excavation_array.clear()
        self.flags.discard(category)


class MaintenanceError(ValueError):
    pass


def complete_maintenance(monitor: PfddrMonitor, state: DegradationState,
                         category: FaultFlag, in_zone: bool = True
                         ) -> DegradationState:
    """Finish servicing one flagged category: zero its coefficients and
    clear its arrays.  Raises unless the robot is in the maintenance zone
    and the category is actually flagged."""
    if not in_zone:
        raise MaintenanceError("maintenance only happens inside the maintenance zone")
    if category not in monitor.flags:
        raise MaintenanceError(f"category {category.value} is not flagged")
    monitor.clear_category(category)
    if category is FaultFlag.SENSING:
        return DegradationState(0.0, state.dc_l, state.dc_r, state.dc_e)
    if category is FaultFlag.MOTOR:
        return DegradationState(state.dc_s, 0.0, 0.0, state.dc_e)
    return DegradationState(state.dc_s, state.dc_l, state.dc_r, 0.0)
