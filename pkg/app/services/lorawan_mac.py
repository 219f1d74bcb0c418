"""
LoRa airtime, EU868 duty-cycle gate and the Class A transmission timeline.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

from app.models.energy import DeviceState
from app.models.lorawan import (
    AckWindow,
    DutyCycleState,
    GateDecision,
    RadioParams,
    TimelineStep,
    TxCycleSpec,
)
from app.utils.exceptions import DomainError, SimulationLogicError

logger = logging.getLogger(__name__)

# Largest application payload per spreading factor (EU868, no repeater)
MAX_PAYLOAD_BYTES: Dict[int, int] = {7: 222, 8: 222, 9: 115, 10: 51, 11: 51, 12: 51}

# Published time-on-air figures (ms) for 125 kHz, CR 4/5, explicit header, CRC on
REFERENCE_AIRTIMES_MS: Dict[Tuple[int, int], float] = {
    (7, 0): 46.34, (7, 5): 51.46, (7, 50): 118.02, (7, 100): 189.70,
    (8, 0): 82.43, (8, 5): 92.67, (8, 50): 215.55, (8, 100): 338.43,
}

# Slack for comparing times that were produced by the same arithmetic
_TIME_EPS = 1e-9


def max_payload(spreading_factor: int) -> int:
    if spreading_factor not in MAX_PAYLOAD_BYTES:
        raise DomainError(f"spreading factor must be 7..12, got {spreading_factor}")
    return MAX_PAYLOAD_BYTES[spreading_factor]


def symbol_time(radio: RadioParams) -> float:
    return (2 ** radio.spreading_factor) / radio.bandwidth_hz


def time_on_air(radio: RadioParams, payload_bytes: int) -> float:
    """
    Airtime in seconds of an uplink carrying payload_bytes of application data.

    Args:
        radio: Modulation parameters
        payload_bytes: Application payload; the LoRaWAN overhead is added

    Returns:
        Time on air in seconds
    """
    if radio.spreading_factor < 7 or radio.spreading_factor > 12:
        raise DomainError(f"spreading factor must be 7..12, got {radio.spreading_factor}")
    if payload_bytes < 0 or payload_bytes > max_payload(radio.spreading_factor):
        raise DomainError(
            f"payload of {payload_bytes} B not allowed at SF{radio.spreading_factor}",
            {"max_payload": max_payload(radio.spreading_factor)}
        )

    sf = radio.spreading_factor
    t_sym = symbol_time(radio)
    low_data_rate = 1 if (sf >= 11 and radio.bandwidth_hz == 125_000.0) else 0
    implicit_header = 0 if radio.explicit_header else 1
    crc = 1 if radio.crc_on else 0
    frame_bytes = payload_bytes + radio.frame_overhead_bytes

    numerator = 8 * frame_bytes - 4 * sf + 28 + 16 * crc - 20 * implicit_header
    denominator = 4 * (sf - 2 * low_data_rate)
    payload_symbols = 8 + max(math.ceil(numerator / denominator) * (radio.coding_rate + 4), 0)
    preamble_time = (radio.preamble_symbols + 4.25) * t_sym
    return preamble_time + payload_symbols * t_sym


def min_tx_interval(toa: float, duty_cycle: float) -> float:
    if toa <= 0:
        raise DomainError(f"time on air must be positive: {toa}")
    if duty_cycle <= 0 or duty_cycle > 1:
        raise DomainError(f"duty cycle must be in (0, 1]: {duty_cycle}")
    return toa / duty_cycle


def _silent_period(toa: float, duty_cycle: float) -> float:
    if toa < 0:
        raise DomainError(f"time on air cannot be negative: {toa}")
    if duty_cycle <= 0 or duty_cycle > 1:
        raise DomainError(f"duty cycle must be in (0, 1]: {duty_cycle}")
    return toa / duty_cycle


def duty_cycle_gate(state: DutyCycleState, now: float) -> GateDecision:
    if now + _TIME_EPS >= state.next_allowed_uplink_start:
        return GateDecision(allowed=True)
    return GateDecision(allowed=False, blocked_until=state.next_allowed_uplink_start)


def record_uplink(state: DutyCycleState, start: float, toa: float,
                  duty_cycle: float = 0.01) -> DutyCycleState:
    if start + _TIME_EPS < state.next_allowed_uplink_start:
        raise SimulationLogicError(
            "uplink started inside the duty-cycle silent period",
            {"start": start, "next_allowed": state.next_allowed_uplink_start}
        )
    return state.model_copy(update={
        "next_allowed_uplink_start": start + _silent_period(toa, duty_cycle)
    })


def downlink_allowed(state: DutyCycleState, start: float, window: AckWindow) -> bool:
    return start + _TIME_EPS >= state.next_allowed_downlink_start(window)


def record_downlink(state: DutyCycleState, start: float, toa: float,
                    duty_cycle: float, window: AckWindow) -> DutyCycleState:
    """Charge a gateway answer to the budget of the band its window uses."""
    if window == AckWindow.NONE:
        raise DomainError("no downlink is sent outside a receive window")
    if not downlink_allowed(state, start, window):
        raise SimulationLogicError(
            f"{window.value} downlink started inside the duty-cycle silent period",
            {"start": start, "next_allowed": state.next_allowed_downlink_start(window)}
        )
    field = "next_allowed_rx2_downlink_start" if window == AckWindow.RX2 else "next_allowed_rx1_downlink_start"
    return state.model_copy(update={field: start + _silent_period(toa, duty_cycle)})


def window_spreading_factor(spec: TxCycleSpec, window: AckWindow) -> int:
    if window == AckWindow.RX2:
        return spec.channel_plan.rx2_spreading_factor
    return spec.radio.spreading_factor


def rx_window_timeout(spec: TxCycleSpec, spreading_factor: int) -> float:
    """How long an empty receive window stays open."""
    if spec.rx_window_timeout_s is not None:
        return spec.rx_window_timeout_s
    return spec.rx_window_symbols * symbol_time(spec.radio.with_sf(spreading_factor))


def ack_airtime(spec: TxCycleSpec, window: AckWindow) -> float:
    radio = spec.radio.with_sf(window_spreading_factor(spec, window))
    return time_on_air(radio, spec.ack_payload_bytes)


def build_cycle_timeline(spec: TxCycleSpec, toa_uplink: float,
                         ack: Optional[AckWindow] = None) -> List[TimelineStep]:
    """
    Class A sequence for one uplink: Tx, Idle until RX1 opens, RX1, and unless
    an ACK arrived in RX1, Idle until RX2 opens and RX2. Ends with a zero-length Sleep.

    Args:
        spec: Cycle description
        toa_uplink: Airtime of the uplink in seconds
        ack: Window carrying the ACK; defaults to what the traffic type expects
    """
    if toa_uplink <= 0:
        raise DomainError(f"uplink airtime must be positive: {toa_uplink}")
    if spec.rx2_delay_s <= spec.rx1_delay_s:
        raise DomainError("RX2 must open after RX1")
    ack = spec.expected_ack() if ack is None else ack

    rx1_sf = window_spreading_factor(spec, AckWindow.RX1)
    rx2_sf = window_spreading_factor(spec, AckWindow.RX2)
    timeline = [
        TimelineStep(DeviceState.TX, toa_uplink),
        TimelineStep(DeviceState.IDLE, spec.rx1_delay_s),
    ]

    if ack == AckWindow.RX1:
        timeline.append(TimelineStep(DeviceState.RX1, ack_airtime(spec, AckWindow.RX1)))
    else:
        rx1 = rx_window_timeout(spec, rx1_sf)
        gap = spec.rx2_delay_s - spec.rx1_delay_s - rx1
        if gap < 0:
            raise DomainError("RX1 window overlaps the opening of RX2")
        timeline.append(TimelineStep(DeviceState.RX1, rx1))
        timeline.append(TimelineStep(DeviceState.IDLE, gap))
        if ack == AckWindow.RX2:
            timeline.append(TimelineStep(DeviceState.RX2, ack_airtime(spec, AckWindow.RX2)))
        else:
            timeline.append(TimelineStep(DeviceState.RX2, rx_window_timeout(spec, rx2_sf)))

    timeline.append(TimelineStep(DeviceState.SLEEP, 0.0))
    return timeline
