"""
Base scheduler class for the transmission policies.
A scheduler decides, for a pending packet, whether the device transmits now.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

from app.models.energy import CircuitParams, DeviceState
from app.models.scheduling import CyclePlan, Decision, SchedulerPolicy
from app.models.traces import HarvestTrace
from app.services.energy_model import (
    equivalent_resistance,
    harvester_resistance,
    rc_time_to_reach,
)
from app.utils.logging_config import get_logger

# Shortest deferral, so a recheck always moves simulated time forward
MIN_DEFER_S = 1e-6


@dataclass(slots=True)
class DecisionContext:
    """What a scheduler sees when a packet is pending and the duty cycle allows it."""
    now: float
    voltage: float
    cycle: CyclePlan
    circuit: CircuitParams
    current_power_w: float
    recheck_interval_s: float
    trace: Optional[HarvestTrace] = None


class BaseScheduler(ABC):
    """
    Abstract base class for all transmission schedulers.
    """

    # Drop the packet on a duty-cycle block instead of regenerating it at release
    drops_when_blocked = False
    # Re-evaluate a deferred packet whenever a new trace sample arrives
    rechecks_on_trace_sample = True

    def __init__(self, policy: SchedulerPolicy):
        self.policy = policy
        self.name = policy.label()
        self.logger = get_logger(f"scheduler.{policy.variant.value}")

    @property
    def observation_period(self) -> Optional[float]:
        """Period of observe() calls, or None when the policy keeps no estimator."""
        return None

    def observe(self, now: float, trace: HarvestTrace) -> None:
        """Feed the estimator; called every observation_period seconds."""

    @abstractmethod
    def decide(self, ctx: DecisionContext) -> Decision:
        """Return SendNow, Defer(recheck_at) or Drop for the pending packet."""

    def time_to_voltage(self, ctx: DecisionContext, target_v: float) -> float:
        """Time until the voltage reaches target_v while sleeping at the current harvest."""
        circuit = ctx.circuit
        r_i = harvester_resistance(ctx.current_power_w, circuit.source_voltage, circuit.power_floor)
        r_eq = equivalent_resistance(circuit.resistances[DeviceState.SLEEP], r_i)
        return rc_time_to_reach(ctx.voltage, target_v, r_eq, r_i, circuit.source_voltage, circuit.capacitance)

    def defer_towards(self, ctx: DecisionContext, target_v: float) -> Decision:
        """Defer until the predicted crossing of target_v, at most one recheck interval."""
        latest = ctx.now + ctx.recheck_interval_s
        if math.isinf(target_v) or target_v <= ctx.voltage:
            return Decision.defer(latest)
        wait = self.time_to_voltage(ctx, target_v)
        if math.isinf(wait):
            return Decision.defer(latest)
        return Decision.defer(min(latest, ctx.now + max(wait, MIN_DEFER_S)))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name})"


class ThresholdScheduler(BaseScheduler):
    """Sends once the voltage reaches a policy-specific start voltage."""

    @abstractmethod
    def required_voltage(self, ctx: DecisionContext) -> float:
        """Start voltage the policy demands at this instant."""

    def decide(self, ctx: DecisionContext) -> Decision:
        required = self.required_voltage(ctx)
        if ctx.voltage >= required:
            return Decision.send_now()
        return self.defer_towards(ctx, required)
