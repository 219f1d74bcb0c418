"""
Discrete-event simulation of one battery-less Class A end device.

Events are kept in a heap ordered by (time, event type, insertion sequence);
the event type order resolves simultaneous events: state exits and threshold
crossings first, then trace samples, estimator updates, packet generation and
finally scheduler rechecks.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed

from app.config.settings import settings
from app.models.energy import DeviceState
from app.models.lorawan import AckWindow, DutyCycleState, TimelineStep
from app.models.scheduling import CyclePlan, DecisionKind
from app.models.schemas import (
    DropReason,
    EventKind,
    EventLog,
    EventRecord,
    MetricsReport,
    ScenarioConfig,
    SweepResult,
)
from app.models.traces import HarvestTrace
from app.schedulers import DecisionContext, build_scheduler
from app.schedulers.base_scheduler import MIN_DEFER_S
from app.services.energy_model import (
    NEVER,
    equivalent_resistance,
    harvester_resistance,
    rc_time_to_reach,
    rc_voltage,
    steady_state_voltage,
)
from app.services.gateway_service import GatewayService
from app.services.lorawan_mac import (
    build_cycle_timeline,
    duty_cycle_gate,
    min_tx_interval,
    record_uplink,
    time_on_air,
)
from app.services.metrics_service import compute_metrics
from app.services.trace_service import load_trace
from app.utils.exceptions import (
    ConfigurationError,
    DomainError,
    SimulationLogicError,
    SimulatorException,
)

logger = logging.getLogger(__name__)

_VOLTAGE_SLACK = 1e-9


class EventType(IntEnum):
    STATE_EXIT = 0
    THRESHOLD = 1
    TRACE_SAMPLE = 2
    ESTIMATOR = 3
    GENERATION = 4
    RECHECK = 5


@dataclass(order=True, slots=True)
class Event:
    time: float
    type: EventType
    seq: int
    token: int = field(default=0, compare=False)


class ScenarioSimulator:
    """
    Runs one scenario to its horizon and returns the event log.

    Stale events are discarded by token: every rescheduling of a threshold
    crossing, a state exit, the generation clock or a recheck bumps the
    corresponding counter.
    """

    def __init__(self, config: ScenarioConfig, trace: Optional[HarvestTrace] = None):
        self.config = config
        self.trace = trace if trace is not None else load_trace(config.trace, config.horizon_s)
        if self.trace.start > 0:
            raise ConfigurationError(
                f"trace starts at {self.trace.start}s; it must cover t=0"
            )

        try:
            self.circuit = config.energy_model().circuit()
            self.spec = config.cycle_spec()
            self.toa = time_on_air(self.spec.radio, config.payload_bytes)
        except (DomainError, ValueError) as e:
            raise ConfigurationError(f"invalid scenario: {str(e)}")

        self.duty_cycle = self.spec.channel_plan.uplink_duty_cycle
        self.dc_interval = min_tx_interval(self.toa, self.duty_cycle)
        self.scheduler = build_scheduler(
            config.scheduler, config.generation_interval_s, config.os_grid_s
        )
        self.gateway = GatewayService(self.spec)
        self._plans: Dict[AckWindow, CyclePlan] = {
            ack: CyclePlan.from_timeline(build_cycle_timeline(self.spec, self.toa, ack))
            for ack in AckWindow
        }
        self._debug = logger.isEnabledFor(logging.DEBUG)
        self._reset()

    def _reset(self) -> None:
        self._queue: List[Event] = []
        self._seq = 0
        self._records: List[EventRecord] = []

        self._t = 0.0
        self._v = self.config.initial_voltage
        self._state = DeviceState.CHARGING
        self._r_load = self.circuit.resistances[DeviceState.CHARGING]
        self._power_w = float(self.trace.powers_w[self.trace.index_at(0.0)])
        self._r_i = harvester_resistance(
            self._power_w, self.circuit.source_voltage, self.circuit.power_floor
        )
        self._r_eq = self._r_load
        self._v_ss = 0.0

        self._threshold_token = 0
        self._state_token = 0
        self._gen_token = 0
        self._recheck_token = 0

        self._pending = False
        self._awaiting_release = False
        # Next generation restarts the clock after a power-up
        self._resumed = False
        self._steps: Optional[Tuple[TimelineStep, ...]] = None
        self._step = 0
        self._cycle_ack = AckWindow.NONE
        self._dc = DutyCycleState()
        self._uplinks = 0

    # Queue

    def _push(self, time: float, event_type: EventType, token: int = 0) -> None:
        self._seq += 1
        heapq.heappush(self._queue, Event(time, event_type, self._seq, token))

    def _log(self, kind: EventKind, detail: str = "") -> None:
        self._records.append(EventRecord(self._t, kind, self._state, self._v, detail))
        if self._debug:
            logger.debug(f"{self._t:12.6f}s {kind.value:<14} {self._state.value:<8} {self._v:.6f}V {detail}")

    # Energy

    def _advance(self, t: float) -> None:
        if t < self._t:
            raise SimulationLogicError(f"time went backwards: {t} < {self._t}")
        if t > self._t:
            self._v = rc_voltage(
                self._v, self._r_eq, self._r_i, self.circuit.source_voltage,
                self.circuit.capacitance, t - self._t
            )
            if self._v > self.circuit.source_voltage + _VOLTAGE_SLACK:
                raise SimulationLogicError(f"voltage {self._v} exceeds the source voltage")
            self._v = min(max(self._v, 0.0), self.circuit.source_voltage)
            self._t = t

    def _update_dynamics(self) -> None:
        self._r_eq = equivalent_resistance(self._r_load, self._r_i)
        self._v_ss = steady_state_voltage(self._r_eq, self._r_i, self.circuit.source_voltage)
        self._schedule_threshold()

    def _schedule_threshold(self) -> None:
        self._threshold_token += 1
        if self._state.is_powered:
            target = self.circuit.v_low
            if self._v < target:
                delay = 0.0
            elif self._v == target and self._v_ss >= target:
                delay = NEVER
            else:
                delay = rc_time_to_reach(
                    self._v, target, self._r_eq, self._r_i,
                    self.circuit.source_voltage, self.circuit.capacitance
                )
        else:
            target = self.circuit.v_high
            if self._v >= target:
                delay = 0.0
            else:
                delay = rc_time_to_reach(
                    self._v, target, self._r_eq, self._r_i,
                    self.circuit.source_voltage, self.circuit.capacitance
                )
        if not math.isinf(delay):
            self._push(self._t + delay, EventType.THRESHOLD, self._threshold_token)

    # Device states

    def _set_state(self, state: DeviceState) -> None:
        self._state = state
        self._r_load = self.circuit.resistances[state]
        self._log(EventKind.STATE)
        self._update_dynamics()

    def _enter_timed_state(self, state: DeviceState, duration: float) -> None:
        self._set_state(state)
        self._state_token += 1
        self._push(self._t + duration, EventType.STATE_EXIT, self._state_token)

    def _activate(self) -> None:
        self._enter_timed_state(DeviceState.WAKEUP, self.config.load.wakeup_duration_s)
        if not self.config.generate_while_off:
            self._gen_token += 1
            self._resumed = True
            self._push(self._t, EventType.GENERATION, self._gen_token)

    def _switch_off(self) -> None:
        self._log(EventKind.OFF)
        if self._pending:
            self._drop(DropReason.OFF)
        self._awaiting_release = False
        self._steps = None
        self._state_token += 1
        self._recheck_token += 1
        if not self.config.generate_while_off:
            self._gen_token += 1
        self._set_state(DeviceState.OFF)

    def _enter_sleep(self) -> None:
        self._set_state(DeviceState.SLEEP)
        if self._awaiting_release and duty_cycle_gate(self._dc, self._t).allowed:
            self._regenerate()
        if self._pending:
            self._evaluate()

    def _regenerate(self) -> None:
        self._awaiting_release = False
        self._pending = True
        self._log(EventKind.GENERATED, "regenerated")

    # Packets

    def _drop(self, reason: DropReason) -> None:
        self._pending = False
        self._log(EventKind.DROP, reason.value)

    def _evaluate(self) -> None:
        """Consult the duty-cycle gate, then the scheduler, for the pending packet."""
        now = self._t
        gate = duty_cycle_gate(self._dc, now)
        if not gate.allowed:
            self._drop(DropReason.DUTY_CYCLE)
            if not self.scheduler.drops_when_blocked:
                self._awaiting_release = True
                self._recheck_token += 1
                self._push(gate.blocked_until, EventType.RECHECK, self._recheck_token)
            return
        if now + self.dc_interval > self.config.horizon_s + _VOLTAGE_SLACK:
            # The duty-cycle budget of this uplink would extend past the horizon
            self._drop(DropReason.DUTY_CYCLE)
            return

        ack = self.gateway.respond(now + self.toa, commit=False)
        plan = self._plans[ack]
        decision = self.scheduler.decide(DecisionContext(
            now=now,
            voltage=self._v,
            cycle=plan,
            circuit=self.circuit,
            current_power_w=self._power_w,
            recheck_interval_s=self.config.recheck_interval_s,
            trace=self.trace,
        ))

        if decision.kind == DecisionKind.SEND_NOW:
            self._start_cycle(plan)
        elif decision.kind == DecisionKind.DEFER:
            self._recheck_token += 1
            self._push(max(decision.recheck_at, now + MIN_DEFER_S), EventType.RECHECK, self._recheck_token)
        else:
            self._drop(DropReason.SCHEDULER)

    def _start_cycle(self, plan: CyclePlan) -> None:
        now = self._t
        if self._v < self.circuit.v_low:
            raise SimulationLogicError(f"send attempted at {self._v}V below the switch-off threshold")
        self._pending = False
        self._recheck_token += 1
        self._dc = record_uplink(self._dc, now, self.toa, self.duty_cycle)
        self._cycle_ack = self.gateway.respond(now + self.toa, commit=True)
        plan = self._plans[self._cycle_ack]

        channels = self.spec.channel_plan.uplink_channels_mhz
        channel = channels[self._uplinks % len(channels)]
        self._uplinks += 1
        self._log(EventKind.SEND, f"{channel}MHz ack={self._cycle_ack.value}")

        self._steps = plan.steps
        self._step = 0
        step = self._steps[0]
        self._enter_timed_state(step.state, step.duration)

    def _finish_step(self) -> None:
        finished = self._steps[self._step]
        if finished.state == DeviceState.TX:
            self._log(EventKind.TX_COMPLETE)
        elif (finished.state == DeviceState.RX1 and self._cycle_ack == AckWindow.RX1) or \
                (finished.state == DeviceState.RX2 and self._cycle_ack == AckWindow.RX2):
            self._log(EventKind.ACK, self._cycle_ack.value)

        self._step += 1
        if self._step < len(self._steps):
            step = self._steps[self._step]
            self._enter_timed_state(step.state, step.duration)
        else:
            self._steps = None
            self._log(EventKind.CYCLE_COMPLETE)
            self._enter_sleep()

    # Event handlers

    def _on_state_exit(self, event: Event) -> None:
        if event.token != self._state_token:
            return
        if self._state == DeviceState.WAKEUP:
            self._enter_sleep()
        elif self._steps is not None:
            self._finish_step()
        else:
            raise SimulationLogicError(f"state exit fired in {self._state.value}")

    def _on_threshold(self, event: Event) -> None:
        if event.token != self._threshold_token:
            return
        if self._state.is_powered:
            self._v = min(self._v, self.circuit.v_low)
            self._switch_off()
        else:
            self._v = max(self._v, self.circuit.v_high)
            self._activate()

    def _on_trace_sample(self, event: Event) -> None:
        k = self.trace.index_at(self._t)
        self._power_w = float(self.trace.powers_w[k])
        self._r_i = harvester_resistance(
            self._power_w, self.circuit.source_voltage, self.circuit.power_floor
        )
        self._update_dynamics()
        self._push_next_sample()
        if self._state == DeviceState.SLEEP and self._pending and self.scheduler.rechecks_on_trace_sample:
            self._evaluate()

    def _on_estimator(self, event: Event) -> None:
        self.scheduler.observe(self._t, self.trace)
        self._push(self._t + self.scheduler.observation_period, EventType.ESTIMATOR)

    def _on_generation(self, event: Event) -> None:
        if event.token != self._gen_token:
            return
        self._push(self._t + self.config.generation_interval_s, EventType.GENERATION, self._gen_token)
        self._log(EventKind.GENERATED, "activation" if self._resumed else "")
        self._resumed = False
        if not self._state.is_powered:
            self._drop(DropReason.OFF)
            return
        if self._pending:
            self._drop(DropReason.OVERWRITTEN)
        self._pending = True
        self._awaiting_release = False
        self._recheck_token += 1
        if self._state == DeviceState.SLEEP:
            self._evaluate()

    def _on_recheck(self, event: Event) -> None:
        if event.token != self._recheck_token or self._state != DeviceState.SLEEP:
            return
        if self._awaiting_release:
            self._regenerate()
        if self._pending:
            self._evaluate()

    def _push_next_sample(self) -> None:
        nxt = self.trace.next_sample_after(self._t)
        if nxt <= self.config.horizon_s:
            self._push(nxt, EventType.TRACE_SAMPLE)

    # Driver

    def run(self) -> EventLog:
        self._reset()
        handlers = {
            EventType.STATE_EXIT: self._on_state_exit,
            EventType.THRESHOLD: self._on_threshold,
            EventType.TRACE_SAMPLE: self._on_trace_sample,
            EventType.ESTIMATOR: self._on_estimator,
            EventType.GENERATION: self._on_generation,
            EventType.RECHECK: self._on_recheck,
        }

        self._set_state(DeviceState.CHARGING)
        self._push_next_sample()
        if self.scheduler.observation_period:
            self._push(self.scheduler.observation_period, EventType.ESTIMATOR)
        if self.config.generate_while_off:
            self._gen_token += 1
            self._push(0.0, EventType.GENERATION, self._gen_token)

        horizon = self.config.horizon_s
        while self._queue:
            event = heapq.heappop(self._queue)
            if event.time > horizon:
                break
            self._advance(event.time)
            handlers[event.type](event)
        self._advance(horizon)

        return EventLog(horizon=horizon, records=self._records)


def run_events(config: ScenarioConfig, trace: Optional[HarvestTrace] = None) -> EventLog:
    """Event log of one scenario; the trace is built from config.trace unless given."""
    logger.info(
        f"Running scenario {config.scheduler.label()} C={config.capacitance_mf:g}mF "
        f"PL={config.payload_bytes}B SF{config.spreading_factor} {config.traffic.value} "
        f"trace={config.trace.describe()}"
    )
    log = ScenarioSimulator(config, trace).run()
    logger.info(f"Scenario finished with {len(log)} events")
    return log


def run_scenario(config: ScenarioConfig, trace: Optional[HarvestTrace] = None) -> Tuple[EventLog, MetricsReport]:
    """Simulate one scenario and measure it."""
    log = run_events(config, trace)
    toa = time_on_air(config.cycle_spec().radio, config.payload_bytes)
    report = compute_metrics(log, config, toa)
    logger.info(
        f"{config.scheduler.label()} C={config.capacitance_mf:g}mF: "
        f"{report.packets_sent} packets, efficiency {report.efficiency_pct:.2f}%"
    )
    return log, report


def _sweep_entry(index: int, config: ScenarioConfig) -> SweepResult:
    try:
        _, report = run_scenario(config)
        return SweepResult(index=index, config=config, report=report)
    except SimulatorException as e:
        logger.warning(f"Sweep entry {index} failed: {e.message}")
        return SweepResult(index=index, config=config, error=e.message)
    except Exception as e:
        logger.error(f"Sweep entry {index} failed unexpectedly: {str(e)}")
        return SweepResult(index=index, config=config, error=str(e))


def sweep(configs: Sequence[ScenarioConfig], workers: Optional[int] = None,
          backend: Optional[str] = None) -> List[SweepResult]:
    """
    Run independent scenarios, possibly in parallel. Results come back in
    input order; a failing scenario is reported in its own entry.
    """
    workers = workers or settings.SWEEP_WORKERS
    logger.info(f"Sweeping {len(configs)} scenarios with {workers} worker(s)")
    if workers == 1:
        results = [_sweep_entry(i, c) for i, c in enumerate(configs)]
    else:
        results = Parallel(n_jobs=workers, backend=backend)(
            delayed(_sweep_entry)(i, c) for i, c in enumerate(configs)
        )
    failed = sum(1 for r in results if not r.ok)
    if failed:
        logger.warning(f"{failed} of {len(configs)} scenarios failed")
    return list(results)
