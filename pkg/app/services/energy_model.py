"""
Closed-form RC model of the storage capacitor.

The harvester is a Thevenin source E behind r_i = E^2 / P_h and the device is a
resistive load R_L, so within a constant segment

    v(t) = v_ss + (v0 - v_ss) * exp(-t / (R_eq * C)),
    R_eq = R_L * r_i / (R_L + r_i),  v_ss = E * R_eq / r_i.

The ``rc_*`` kernels take plain floats and skip validation; the engine calls
them on every event. The public operations validate their inputs.
"""

import logging
import math
from typing import Iterable, Optional, Tuple

from app.config.settings import settings
from app.models.energy import CapacitorState
from app.utils.exceptions import DomainError

logger = logging.getLogger(__name__)

# Returned by time_to_reach when the target lies beyond the steady state
NEVER = math.inf


def harvester_resistance(
    power_w: float,
    source_voltage: Optional[float] = None,
    min_power_floor: Optional[float] = None
) -> float:
    """Harvester internal resistance E^2 / P_h, infinite when the harvester is absent."""
    source_voltage = settings.SOURCE_VOLTAGE_E if source_voltage is None else source_voltage
    min_power_floor = settings.MIN_POWER_FLOOR_W if min_power_floor is None else min_power_floor
    if power_w < 0:
        raise DomainError(f"harvested power cannot be negative: {power_w}")
    if power_w <= min_power_floor:
        return math.inf
    return source_voltage * source_voltage / power_w


def equivalent_resistance(load_r: float, harvester_r: float) -> float:
    """Parallel combination of the load and the harvester resistance."""
    if load_r <= 0 or harvester_r <= 0:
        raise DomainError("resistances must be positive", {"load_r": load_r, "harvester_r": harvester_r})
    if math.isinf(harvester_r):
        return load_r
    return load_r * harvester_r / (load_r + harvester_r)


def steady_state_voltage(r_eq: float, r_i: float, source_voltage: float) -> float:
    if math.isinf(r_i):
        return 0.0
    return source_voltage * r_eq / r_i


def rc_voltage(v0: float, r_eq: float, r_i: float, source_voltage: float,
               capacitance: float, dt: float) -> float:
    v_ss = steady_state_voltage(r_eq, r_i, source_voltage)
    return v_ss + (v0 - v_ss) * math.exp(-dt / (r_eq * capacitance))


def rc_time_to_reach(v0: float, target: float, r_eq: float, r_i: float,
                     source_voltage: float, capacitance: float) -> float:
    if target == v0:
        return 0.0
    v_ss = steady_state_voltage(r_eq, r_i, source_voltage)
    if not (v0 < target < v_ss or v_ss < target < v0):
        return NEVER
    return r_eq * capacitance * math.log((v0 - v_ss) / (target - v_ss))


def rc_decay(r_eq: float, capacitance: float, dt: float) -> float:
    return math.exp(-dt / (r_eq * capacitance))


def _check_state(state: CapacitorState, source_voltage: float) -> None:
    if source_voltage <= 0:
        raise DomainError(f"source voltage must be positive: {source_voltage}")
    if state.voltage > source_voltage:
        raise DomainError(
            f"capacitor voltage {state.voltage} exceeds the source voltage {source_voltage}"
        )


def voltage_after(state: CapacitorState, r_eq: float, r_i: float,
                  source_voltage: float, dt: float) -> float:
    """
    Capacitor voltage after dt seconds of constant load and harvest.

    Args:
        state: Current capacitor state (capacitance and voltage)
        r_eq: Equivalent resistance R_L || r_i
        r_i: Harvester resistance, ``math.inf`` when absent
        source_voltage: Harvester source voltage E
        dt: Elapsed time in seconds

    Returns:
        Voltage at the end of the interval
    """
    if dt < 0:
        raise DomainError(f"elapsed time cannot be negative: {dt}")
    if r_eq <= 0 or r_i <= 0:
        raise DomainError("resistances must be positive", {"r_eq": r_eq, "r_i": r_i})
    _check_state(state, source_voltage)
    return rc_voltage(state.voltage, r_eq, r_i, source_voltage, state.capacitance_f, dt)


def time_to_reach(state: CapacitorState, target_v: float, r_eq: float, r_i: float,
                  source_voltage: float) -> float:
    """
    Time until the voltage reaches target_v, or NEVER if the steady state
    lies on the near side of the target.
    """
    if target_v < 0 or target_v > source_voltage:
        raise DomainError(f"target voltage {target_v} outside [0, {source_voltage}]")
    if r_eq <= 0 or r_i <= 0:
        raise DomainError("resistances must be positive", {"r_eq": r_eq, "r_i": r_i})
    _check_state(state, source_voltage)
    return rc_time_to_reach(state.voltage, target_v, r_eq, r_i, source_voltage, state.capacitance_f)


def advance_piecewise(
    state: CapacitorState,
    load_r: float,
    segments: Iterable[Tuple[float, float]],
    source_voltage: Optional[float] = None,
    min_power_floor: Optional[float] = None
) -> float:
    """
    Fold voltage_after over consecutive (duration, harvest power) segments
    at a constant load.
    """
    source_voltage = settings.SOURCE_VOLTAGE_E if source_voltage is None else source_voltage
    _check_state(state, source_voltage)
    v = state.voltage
    for duration, power_w in segments:
        if duration < 0:
            raise DomainError(f"segment duration cannot be negative: {duration}")
        r_i = harvester_resistance(power_w, source_voltage, min_power_floor)
        r_eq = equivalent_resistance(load_r, r_i)
        v = rc_voltage(v, r_eq, r_i, source_voltage, state.capacitance_f, duration)
    return v
