"""
Energy-model types: harvester, capacitor, load profile and thresholds.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict

from pydantic import BaseModel, Field, model_validator

from app.config.settings import settings


class DeviceState(str, Enum):
    """Operating states of the end device."""
    CHARGING = "charging"
    OFF = "off"
    WAKEUP = "wakeup"
    SLEEP = "sleep"
    TX = "tx"
    IDLE = "idle"
    RX1 = "rx1"
    RX2 = "rx2"

    @property
    def is_powered(self) -> bool:
        return self not in (DeviceState.CHARGING, DeviceState.OFF)


class HarvesterParams(BaseModel):
    """Thevenin equivalent of the harvester: source E behind r_i = E^2 / P_h."""
    source_voltage_e: float = Field(default_factory=lambda: settings.SOURCE_VOLTAGE_E, gt=0)
    min_power_floor_w: float = Field(default_factory=lambda: settings.MIN_POWER_FLOOR_W, ge=0)


class CapacitorState(BaseModel):
    capacitance_f: float = Field(gt=0)
    voltage: float = Field(ge=0)


class Thresholds(BaseModel):
    v_th_low: float = Field(default_factory=lambda: settings.V_TH_LOW, gt=0)
    v_th_high: float = Field(default_factory=lambda: settings.V_TH_HIGH, gt=0)

    @model_validator(mode="after")
    def check_order(self):
        if self.v_th_low >= self.v_th_high:
            raise ValueError("v_th_low must be below v_th_high")
        return self


class LoadProfile(BaseModel):
    """Per-state load resistance R_L (ohm) and the wake-up duration."""
    off_ohm: float = Field(default_factory=lambda: settings.R_OFF_OHM, gt=0)
    sleep_ohm: float = Field(default_factory=lambda: settings.R_SLEEP_OHM, gt=0)
    idle_ohm: float = Field(default_factory=lambda: settings.R_IDLE_OHM, gt=0)
    rx_ohm: float = Field(default_factory=lambda: settings.R_RX_OHM, gt=0)
    wakeup_ohm: float = Field(default_factory=lambda: settings.R_WAKEUP_OHM, gt=0)
    tx_ohm: Dict[int, float] = Field(default_factory=lambda: dict(settings.TX_RESISTANCE_OHM))
    wakeup_duration_s: float = Field(default_factory=lambda: settings.WAKEUP_DURATION_S, gt=0)

    @model_validator(mode="after")
    def check_ordering(self):
        if not self.tx_ohm:
            raise ValueError("at least one transmit power level is required")
        if any(r <= 0 for r in self.tx_ohm.values()):
            raise ValueError("transmit resistances must be positive")
        others = [self.sleep_ohm, self.idle_ohm, self.rx_ohm, self.wakeup_ohm]
        if any(self.off_ohm < r for r in others + list(self.tx_ohm.values())):
            raise ValueError("the Off resistance must be the largest load")
        if max(self.tx_ohm.values()) > min(others):
            raise ValueError("transmit resistances must be the smallest loads")
        return self

    def resistance(self, state: DeviceState, tx_power_dbm: int) -> float:
        if state in (DeviceState.OFF, DeviceState.CHARGING):
            return self.off_ohm
        if state == DeviceState.TX:
            if tx_power_dbm not in self.tx_ohm:
                raise ValueError(f"no transmit resistance for {tx_power_dbm} dBm")
            return self.tx_ohm[tx_power_dbm]
        return {
            DeviceState.WAKEUP: self.wakeup_ohm,
            DeviceState.SLEEP: self.sleep_ohm,
            DeviceState.IDLE: self.idle_ohm,
            DeviceState.RX1: self.rx_ohm,
            DeviceState.RX2: self.rx_ohm,
        }[state]


@dataclass(frozen=True, slots=True)
class CircuitParams:
    """Flattened electrical parameters used on the engine's hot paths."""
    source_voltage: float
    capacitance: float
    v_low: float
    v_high: float
    power_floor: float
    resistances: Dict[DeviceState, float]


class EnergyModel(BaseModel):
    """Everything needed to evolve the storage voltage of one device."""
    harvester: HarvesterParams = Field(default_factory=HarvesterParams)
    capacitance_f: float = Field(gt=0)
    load: LoadProfile = Field(default_factory=LoadProfile)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    tx_power_dbm: int = Field(default_factory=lambda: settings.TX_POWER_DBM)

    @model_validator(mode="after")
    def check_consistency(self):
        if self.thresholds.v_th_high > self.harvester.source_voltage_e:
            raise ValueError("v_th_high cannot exceed the source voltage E")
        if self.tx_power_dbm not in self.load.tx_ohm:
            raise ValueError(f"no transmit resistance for {self.tx_power_dbm} dBm")
        return self

    def circuit(self) -> CircuitParams:
        return CircuitParams(
            source_voltage=self.harvester.source_voltage_e,
            capacitance=self.capacitance_f,
            v_low=self.thresholds.v_th_low,
            v_high=self.thresholds.v_th_high,
            power_floor=self.harvester.min_power_floor_w,
            resistances={s: self.load.resistance(s, self.tx_power_dbm) for s in DeviceState},
        )
