from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from app.config.settings import settings
from app.models.energy import (
    DeviceState,
    EnergyModel,
    HarvesterParams,
    LoadProfile,
    Thresholds,
)
from app.models.lorawan import (
    AckWindow,
    ChannelPlan,
    RadioParams,
    TrafficType,
    TxCycleSpec,
)
from app.models.scheduling import SchedulerPolicy
from app.models.traces import TraceSource, TraceSourceKind

# Scenario schemas
class ScenarioConfig(BaseModel):
    """One fully specified simulation run."""
    trace: TraceSource
    scheduler: SchedulerPolicy
    capacitance_f: float = Field(gt=0)
    payload_bytes: int = Field(default=5, ge=0)
    spreading_factor: int = Field(default_factory=lambda: settings.SPREADING_FACTOR, ge=7, le=12)
    rx2_spreading_factor: int = Field(default_factory=lambda: settings.RX2_SPREADING_FACTOR, ge=7, le=12)
    traffic: TrafficType = TrafficType.UNCONFIRMED
    ack_window: AckWindow = AckWindow.RX1
    horizon_s: float = Field(default_factory=lambda: settings.HORIZON_S, gt=0)
    generation_interval_s: float = Field(default_factory=lambda: settings.GENERATION_INTERVAL_S, gt=0)
    initial_voltage: float = Field(default_factory=lambda: settings.INITIAL_VOLTAGE, ge=0)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    harvester: HarvesterParams = Field(default_factory=HarvesterParams)
    load: LoadProfile = Field(default_factory=LoadProfile)
    tx_power_dbm: int = Field(default_factory=lambda: settings.TX_POWER_DBM)
    rx_window_symbols: int = Field(default_factory=lambda: settings.RX_WINDOW_SYMBOLS, gt=0)
    uplink_duty_cycle: float = Field(default_factory=lambda: settings.UPLINK_DUTY_CYCLE, gt=0, le=1)
    recheck_interval_s: float = Field(default_factory=lambda: settings.RECHECK_INTERVAL_S, gt=0)
    os_grid_s: float = Field(default_factory=lambda: settings.OS_GRID_S, gt=0)
    generate_while_off: bool = False

    @model_validator(mode="after")
    def check_voltages(self):
        if self.initial_voltage > self.harvester.source_voltage_e:
            raise ValueError("initial voltage cannot exceed the source voltage E")
        if self.thresholds.v_th_high > self.harvester.source_voltage_e:
            raise ValueError("v_th_high cannot exceed the source voltage E")
        return self

    @property
    def capacitance_mf(self) -> float:
        return self.capacitance_f * 1e3

    @property
    def trace_dt_s(self) -> Optional[float]:
        """Sample period of a generated trace; None for file and inline traces."""
        if self.trace.kind in (TraceSourceKind.CONSTANT, TraceSourceKind.SYNTHETIC):
            return self.trace.dt_s or settings.TRACE_DT_S
        return None

    def energy_model(self) -> EnergyModel:
        return EnergyModel(
            harvester=self.harvester,
            capacitance_f=self.capacitance_f,
            load=self.load,
            thresholds=self.thresholds,
            tx_power_dbm=self.tx_power_dbm,
        )

    def cycle_spec(self) -> TxCycleSpec:
        return TxCycleSpec(
            payload_bytes=self.payload_bytes,
            radio=RadioParams(spreading_factor=self.spreading_factor),
            channel_plan=ChannelPlan(
                uplink_duty_cycle=self.uplink_duty_cycle,
                rx2_spreading_factor=self.rx2_spreading_factor,
            ),
            traffic=self.traffic,
            ack_window=self.ack_window,
            rx_window_symbols=self.rx_window_symbols,
        )

    def echo(self) -> Dict[str, Any]:
        """Flat view written next to the results of this scenario."""
        return {
            "scheduler": self.scheduler.label(),
            "capacitance_mf": self.capacitance_mf,
            "payload_b": self.payload_bytes,
            "sf": self.spreading_factor,
            "traffic": self.traffic.value,
            "ack_window": self.ack_window.value,
            "rx2_sf": self.rx2_spreading_factor,
            "horizon_s": self.horizon_s,
            "interval_s": self.generation_interval_s,
            "v_low": self.thresholds.v_th_low,
            "v_high": self.thresholds.v_th_high,
            "initial_v": self.initial_voltage,
            "trace": self.trace.describe(),
            "seed": self.trace.seed if self.trace.kind == TraceSourceKind.SYNTHETIC else None,
            "trace_dt_s": self.trace_dt_s,
            "generate_while_off": self.generate_while_off,
            "tx_power_dbm": self.tx_power_dbm,
            "rx_window_symbols": self.rx_window_symbols,
            "uplink_duty_cycle": self.uplink_duty_cycle,
            "recheck_interval_s": self.recheck_interval_s,
            "os_grid_s": self.os_grid_s,
            "source_voltage_e": self.harvester.source_voltage_e,
            "power_floor_w": self.harvester.min_power_floor_w,
            "r_off_ohm": self.load.off_ohm,
            "r_sleep_ohm": self.load.sleep_ohm,
            "r_idle_ohm": self.load.idle_ohm,
            "r_rx_ohm": self.load.rx_ohm,
            "r_wakeup_ohm": self.load.wakeup_ohm,
            "r_tx_ohm": self.load.tx_ohm[self.tx_power_dbm],
            "wakeup_s": self.load.wakeup_duration_s,
        }


CONFIG_COLUMNS = [
    "scheduler", "capacitance_mf", "payload_b", "sf", "traffic", "ack_window",
    "rx2_sf", "horizon_s", "interval_s", "v_low", "v_high", "initial_v", "trace", "seed",
    "trace_dt_s", "generate_while_off", "tx_power_dbm", "rx_window_symbols", "uplink_duty_cycle",
    "recheck_interval_s", "os_grid_s", "source_voltage_e", "power_floor_w", "r_off_ohm",
    "r_sleep_ohm", "r_idle_ohm", "r_rx_ohm", "r_wakeup_ohm", "r_tx_ohm", "wakeup_s",
]

# Event log schemas
class EventKind(str, Enum):
    STATE = "state"
    GENERATED = "generated"
    SEND = "send"
    TX_COMPLETE = "tx_complete"
    ACK = "ack"
    CYCLE_COMPLETE = "cycle_complete"
    DROP = "drop"
    OFF = "off"


class DropReason(str, Enum):
    DUTY_CYCLE = "dc"
    OFF = "off"
    OVERWRITTEN = "overwritten"
    SCHEDULER = "scheduler"


@dataclass(frozen=True, slots=True)
class EventRecord:
    time: float
    kind: EventKind
    state: DeviceState
    voltage: float
    detail: str = ""


@dataclass
class EventLog:
    horizon: float
    records: List[EventRecord] = field(default_factory=list)

    def of_kind(self, kind: EventKind) -> List[EventRecord]:
        return [r for r in self.records if r.kind == kind]

    def __len__(self) -> int:
        return len(self.records)

# Result schemas
class MetricsReport(BaseModel):
    packets_sent: int = Field(ge=0)
    p_max: int = Field(ge=0)
    efficiency_pct: float = Field(ge=0)
    on_fraction: float = Field(ge=0)
    off_fraction: float = Field(ge=0)
    charging_fraction: float = Field(ge=0)
    mean_inter_tx_s: Optional[float] = None
    stddev_inter_tx_s: Optional[float] = None
    t_packet_s: float = Field(gt=0)
    switch_offs: int = Field(default=0, ge=0)
    drops: Dict[str, int] = Field(default_factory=dict)
    interval_counts: List[int] = Field(default_factory=list)
    bucket_s: float = Field(default_factory=lambda: settings.REPORT_BUCKET_S, gt=0)
    config: Dict[str, Any] = Field(default_factory=dict)


class SweepResult(BaseModel):
    index: int
    config: ScenarioConfig
    report: Optional[MetricsReport] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

# CLI schemas
class Command(str, Enum):
    RUN = "run"
    SWEEP = "sweep"
    AIRTIME = "airtime"
    TRACE_GEN = "trace-gen"


class RunSpec(BaseModel):
    """A parsed command line: one command plus raw option values."""
    command: Command
    config_path: Optional[Path] = None
    # Flag values keyed by flag name without dashes, e.g. "capacitance-mf"
    overrides: Dict[str, str] = Field(default_factory=dict)
    out: Optional[Path] = None
    events: Optional[Path] = None
    series: Optional[Path] = None
    workers: Optional[int] = Field(default=None, ge=1)
    check_table1: bool = False
