"""
Energy-modeling schedulers.

Each one predicts the harvest P over the coming cycle and sends when the
voltage covers required_start_voltage(cycle, P). They differ only in the
prediction.
"""

from abc import abstractmethod
from typing import Dict, Optional, Tuple

from app.models.scheduling import CyclePlan, SchedulerPolicy
from app.models.traces import EwmaEstimator, HarvestTrace
from app.schedulers.base_scheduler import DecisionContext, ThresholdScheduler
from app.schedulers.feasibility import required_start_voltage
from app.services.trace_service import (
    ewma_predict,
    ewma_update,
    window_mean,
    window_min,
)
from app.utils.exceptions import ConfigurationError


class EnergyModelingScheduler(ThresholdScheduler):

    def __init__(self, policy: SchedulerPolicy):
        super().__init__(policy)
        self._cache: Dict[Tuple[CyclePlan, float], float] = {}

    @abstractmethod
    def predicted_power(self, ctx: DecisionContext) -> float:
        """Harvest power (W) assumed for the coming cycle."""

    def required_voltage(self, ctx: DecisionContext) -> float:
        power = self.predicted_power(ctx)
        key = (ctx.cycle, power)
        if key not in self._cache:
            if len(self._cache) > 4096:
                self._cache.clear()
            self._cache[key] = required_start_voltage(ctx.cycle, power, ctx.circuit)
        return self._cache[key]

    def _trace(self, ctx: DecisionContext) -> HarvestTrace:
        if ctx.trace is None:
            raise ConfigurationError(f"scheduler {self.name} needs the observed harvest")
        return ctx.trace


class ConservativeScheduler(EnergyModelingScheduler):
    """Assumes nothing is harvested during the cycle."""

    def predicted_power(self, ctx: DecisionContext) -> float:
        return 0.0


class MovingAverageScheduler(EnergyModelingScheduler):
    """Mean harvest over the last x seconds."""

    def predicted_power(self, ctx: DecisionContext) -> float:
        return window_mean(self._trace(ctx), ctx.now, self.policy.window_s)


class MinimumHarvestScheduler(EnergyModelingScheduler):
    """Smallest harvest seen in the last x seconds."""

    def predicted_power(self, ctx: DecisionContext) -> float:
        return window_min(self._trace(ctx), ctx.now, self.policy.window_s)


class AvesScheduler(EnergyModelingScheduler):
    """EWMA of window means minus the EWMA of their deviation."""

    def __init__(self, policy: SchedulerPolicy, default_window_s: float):
        super().__init__(policy)
        self.window_s = policy.window_s or default_window_s
        self.estimator = EwmaEstimator(gain=policy.gain, window_s=self.window_s)

    @property
    def observation_period(self) -> Optional[float]:
        return self.window_s

    def observe(self, now: float, trace: HarvestTrace) -> None:
        self.estimator = ewma_update(self.estimator, window_mean(trace, now, self.window_s))

    def predicted_power(self, ctx: DecisionContext) -> float:
        return ewma_predict(self.estimator)
