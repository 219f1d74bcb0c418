"""
Transmission schedulers and the factory that builds them from a policy.
"""

from typing import Optional

from app.config.settings import settings
from app.models.scheduling import SchedulerPolicy, SchedulerVariant
from app.schedulers.base_scheduler import BaseScheduler, DecisionContext
from app.schedulers.benchmark import OptimalScheduler, UnawareScheduler
from app.schedulers.energy_modeling import (
    AvesScheduler,
    ConservativeScheduler,
    MinimumHarvestScheduler,
    MovingAverageScheduler,
)
from app.schedulers.fixed_threshold import FixedThresholdScheduler


def build_scheduler(
    policy: SchedulerPolicy,
    generation_interval_s: Optional[float] = None,
    os_grid_s: Optional[float] = None,
) -> BaseScheduler:
    """Create a fresh scheduler instance; estimators start empty."""
    generation_interval_s = generation_interval_s or settings.GENERATION_INTERVAL_S
    variant = policy.variant
    if variant == SchedulerVariant.US:
        return UnawareScheduler(policy)
    if variant == SchedulerVariant.OS:
        return OptimalScheduler(policy, grid_s=os_grid_s or settings.OS_GRID_S)
    if variant == SchedulerVariant.FS:
        return FixedThresholdScheduler(policy)
    if variant == SchedulerVariant.CS:
        return ConservativeScheduler(policy)
    if variant == SchedulerVariant.AS:
        return MovingAverageScheduler(policy)
    if variant == SchedulerVariant.MINS:
        return MinimumHarvestScheduler(policy)
    return AvesScheduler(policy, default_window_s=generation_interval_s)


__all__ = ["BaseScheduler", "DecisionContext", "build_scheduler"]
