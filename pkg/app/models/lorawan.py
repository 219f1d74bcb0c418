"""
LoRaWAN MAC types: radio parameters, EU868 channel plan, Class A cycle
description and duty-cycle bookkeeping.
"""

from enum import Enum
from typing import List, NamedTuple, Optional

from pydantic import BaseModel, Field, field_validator

from app.config.settings import settings
from app.models.energy import DeviceState


class TrafficType(str, Enum):
    CONFIRMED = "confirmed"
    UNCONFIRMED = "unconfirmed"


class AckWindow(str, Enum):
    """Receive window in which the network server answers a confirmed uplink."""
    RX1 = "rx1"
    RX2 = "rx2"
    NONE = "none"


class RadioParams(BaseModel):
    spreading_factor: int = Field(default_factory=lambda: settings.SPREADING_FACTOR, ge=7, le=12)
    bandwidth_hz: float = 125_000.0
    coding_rate: int = Field(default=1, ge=1, le=4)  # 4/(4+CR)
    preamble_symbols: int = Field(default=8, ge=0)
    crc_on: bool = True
    explicit_header: bool = True
    # LoRaWAN header (MHDR + FHDR + FPort) plus MIC
    frame_overhead_bytes: int = Field(default=13, ge=0)

    @field_validator("bandwidth_hz")
    @classmethod
    def check_bandwidth(cls, v):
        if v not in (125_000.0, 250_000.0, 500_000.0):
            raise ValueError("bandwidth must be 125, 250 or 500 kHz")
        return v

    def with_sf(self, spreading_factor: int) -> "RadioParams":
        return self.model_copy(update={"spreading_factor": spreading_factor})


class ChannelPlan(BaseModel):
    """EU868 default channels and duty-cycle limits."""
    uplink_channels_mhz: List[float] = Field(default_factory=lambda: [868.1, 868.3, 868.5])
    uplink_duty_cycle: float = Field(default_factory=lambda: settings.UPLINK_DUTY_CYCLE, gt=0, le=1)
    rx2_channel_mhz: float = 869.525
    rx2_duty_cycle: float = Field(default_factory=lambda: settings.DOWNLINK_DUTY_CYCLE, gt=0, le=1)
    rx2_spreading_factor: int = Field(default_factory=lambda: settings.RX2_SPREADING_FACTOR, ge=7, le=12)


class TxCycleSpec(BaseModel):
    """What one Class A transmission cycle looks like."""
    payload_bytes: int = Field(default=5, ge=0)
    radio: RadioParams = Field(default_factory=RadioParams)
    channel_plan: ChannelPlan = Field(default_factory=ChannelPlan)
    traffic: TrafficType = TrafficType.UNCONFIRMED
    ack_window: AckWindow = AckWindow.RX1
    rx1_delay_s: float = Field(default=1.0, gt=0)
    rx2_delay_s: float = Field(default=2.0, gt=0)
    rx_window_symbols: int = Field(default_factory=lambda: settings.RX_WINDOW_SYMBOLS, gt=0)
    rx_window_timeout_s: Optional[float] = Field(default=None, gt=0)
    ack_payload_bytes: int = Field(default=0, ge=0)

    def expected_ack(self) -> AckWindow:
        if self.traffic == TrafficType.UNCONFIRMED:
            return AckWindow.NONE
        return self.ack_window


class DutyCycleState(BaseModel):
    next_allowed_uplink_start: float = 0.0
    # Gateway side: RX1 answers use the uplink sub-band, RX2 answers 869.525 MHz
    next_allowed_rx1_downlink_start: float = 0.0
    next_allowed_rx2_downlink_start: float = 0.0

    def next_allowed_downlink_start(self, window: AckWindow) -> float:
        if window == AckWindow.RX2:
            return self.next_allowed_rx2_downlink_start
        return self.next_allowed_rx1_downlink_start


class GateDecision(BaseModel):
    allowed: bool
    blocked_until: Optional[float] = None


class TimelineStep(NamedTuple):
    state: DeviceState
    duration: float
