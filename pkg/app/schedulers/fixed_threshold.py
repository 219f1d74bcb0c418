from app.models.scheduling import Decision
from app.schedulers.base_scheduler import DecisionContext, ThresholdScheduler


class FixedThresholdScheduler(ThresholdScheduler):
    """Sends once the voltage is above a fixed value, e.g. 1.82 V."""

    def required_voltage(self, ctx: DecisionContext) -> float:
        return self.policy.v_th_fs

    def decide(self, ctx: DecisionContext) -> Decision:
        # Strictly above: a packet exactly at the threshold waits
        if ctx.voltage > self.policy.v_th_fs:
            return Decision.send_now()
        return self.defer_towards(ctx, self.policy.v_th_fs)
