"""
Energy feasibility of a transmission cycle.

Within one state the load and the harvest are constant, so the voltage is
monotone and its minimum sits on a state boundary; both checks below only
look at boundaries.
"""

import math
from typing import List, Optional, Tuple

from scipy.optimize import bisect

from app.models.energy import CircuitParams
from app.models.scheduling import CyclePlan
from app.models.traces import HarvestTrace
from app.services.energy_model import (
    equivalent_resistance,
    harvester_resistance,
    rc_decay,
    rc_voltage,
    steady_state_voltage,
)
from app.utils.exceptions import DomainError

# Returned by required_start_voltage when even a full capacitor is not enough
UNREACHABLE = math.inf

_BISECT_XTOL = 1e-12
_BISECT_MAXITER = 60
# Added to the bisection root so that an admitted cycle never grazes V_th_low
_GUARD_V = 1e-9


def _affine_steps(cycle: CyclePlan, power_w: float, circuit: CircuitParams) -> List[Tuple[float, float]]:
    """(steady state, decay) per step: v_out = v_ss + (v_in - v_ss) * decay."""
    r_i = harvester_resistance(power_w, circuit.source_voltage, circuit.power_floor)
    steps = []
    for step in cycle.steps:
        r_eq = equivalent_resistance(circuit.resistances[step.state], r_i)
        steps.append((
            steady_state_voltage(r_eq, r_i, circuit.source_voltage),
            rc_decay(r_eq, circuit.capacitance, step.duration),
        ))
    return steps


def min_margin(v0: float, affine: List[Tuple[float, float]], v_low: float) -> float:
    """Smallest (v - v_low) over all state boundaries of the cycle."""
    v = v0
    worst = v0 - v_low
    for v_ss, decay in affine:
        v = v_ss + (v - v_ss) * decay
        worst = min(worst, v - v_low)
    return worst


def required_start_voltage(
    cycle: CyclePlan,
    predicted_power_w: float,
    circuit: CircuitParams
) -> float:
    """
    Minimum start voltage that keeps the capacitor at or above V_th_low through
    the whole cycle when harvest stays at predicted_power_w.

    Args:
        cycle: Timeline of the transmission cycle
        predicted_power_w: Harvest assumed constant over the cycle (W)
        circuit: Electrical parameters

    Returns:
        Voltage in [V_th_low, E], or UNREACHABLE
    """
    if predicted_power_w < 0:
        raise DomainError(f"predicted harvest cannot be negative: {predicted_power_w}")

    affine = _affine_steps(cycle, predicted_power_w, circuit)
    v_low, v_top = circuit.v_low, circuit.source_voltage

    def margin(v0: float) -> float:
        return min_margin(v0, affine, v_low)

    if margin(v_low) >= 0:
        return v_low
    if margin(v_top) < 0:
        return UNREACHABLE

    root = bisect(margin, v_low, v_top, xtol=_BISECT_XTOL, maxiter=_BISECT_MAXITER)
    while margin(root) < 0 and root < v_top:
        root = min(root + _BISECT_XTOL, v_top)
    return min(root + _GUARD_V, v_top)


def cycle_min_voltage(
    start_voltage: float,
    cycle: CyclePlan,
    circuit: CircuitParams,
    power_w: Optional[float] = None,
    trace: Optional[HarvestTrace] = None,
    start_time: float = 0.0
) -> float:
    """
    Lowest boundary voltage of a cycle started at start_voltage, either under a
    constant harvest or against a trace starting at start_time.
    """
    if trace is None:
        return min_margin(start_voltage, _affine_steps(cycle, power_w or 0.0, circuit), 0.0)

    v = start_voltage
    lowest = v
    t = start_time
    for step in cycle.steps:
        load_r = circuit.resistances[step.state]
        for duration, seg_power in trace.segments(t, t + step.duration):
            r_i = harvester_resistance(seg_power, circuit.source_voltage, circuit.power_floor)
            r_eq = equivalent_resistance(load_r, r_i)
            v = rc_voltage(v, r_eq, r_i, circuit.source_voltage, circuit.capacitance, duration)
            lowest = min(lowest, v)
        t += step.duration
    return lowest


def os_feasible(
    now: float,
    voltage: float,
    trace: HarvestTrace,
    cycle: CyclePlan,
    circuit: CircuitParams
) -> bool:
    """True iff starting the cycle now keeps V >= V_th_low under the true trace."""
    if voltage < circuit.v_low:
        return False
    return cycle_min_voltage(voltage, cycle, circuit, trace=trace, start_time=now) >= circuit.v_low
