"""
Reference policies: the energy-unaware device and the trace-oracle optimum.
"""

from app.models.scheduling import Decision
from app.schedulers.base_scheduler import BaseScheduler, DecisionContext
from app.schedulers.feasibility import os_feasible, required_start_voltage
from app.utils.exceptions import ConfigurationError


class UnawareScheduler(BaseScheduler):
    """Transmits whenever the duty cycle allows; blocked packets are lost."""

    drops_when_blocked = True
    rechecks_on_trace_sample = False

    def decide(self, ctx: DecisionContext) -> Decision:
        return Decision.send_now()


class OptimalScheduler(BaseScheduler):
    """
    Knows the true future harvest and transmits as soon as the whole cycle
    would keep the voltage above V_th_low. Decision epochs are the DC release,
    then a grid of ``grid_s`` tightened by the crossing predicted for the
    currently observed harvest.
    """

    def __init__(self, policy, grid_s: float):
        super().__init__(policy)
        self.grid_s = grid_s

    def decide(self, ctx: DecisionContext) -> Decision:
        if ctx.trace is None:
            raise ConfigurationError("the optimal scheduler needs the harvest trace")
        if os_feasible(ctx.now, ctx.voltage, ctx.trace, ctx.cycle, ctx.circuit):
            return Decision.send_now()
        grid_ctx = DecisionContext(
            now=ctx.now,
            voltage=ctx.voltage,
            cycle=ctx.cycle,
            circuit=ctx.circuit,
            current_power_w=ctx.current_power_w,
            recheck_interval_s=self.grid_s,
            trace=ctx.trace,
        )
        return self.defer_towards(
            grid_ctx, required_start_voltage(ctx.cycle, ctx.current_power_w, ctx.circuit)
        )
