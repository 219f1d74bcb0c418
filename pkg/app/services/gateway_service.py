"""
Ideal gateway / network server answering confirmed uplinks.
"""

import logging
from typing import Optional

from app.models.lorawan import AckWindow, DutyCycleState, TrafficType, TxCycleSpec
from app.services.lorawan_mac import ack_airtime, downlink_allowed, record_downlink

logger = logging.getLogger(__name__)


class GatewayService:
    """
    Acknowledges every confirmed uplink in the configured receive window,
    subject to the gateway's own downlink duty cycle. RX1 answers share the
    uplink sub-band budget; RX2 answers use the 869.525 MHz budget. A blocked
    RX1 answer falls back to RX2.
    """

    def __init__(self, spec: TxCycleSpec):
        self.spec = spec
        self.state = DutyCycleState()

    def _window_start(self, window: AckWindow, uplink_end: float) -> float:
        if window == AckWindow.RX1:
            return uplink_end + self.spec.rx1_delay_s
        return uplink_end + self.spec.rx2_delay_s

    def _duty_cycle(self, window: AckWindow) -> float:
        if window == AckWindow.RX1:
            return self.spec.channel_plan.uplink_duty_cycle
        return self.spec.channel_plan.rx2_duty_cycle

    def respond(self, uplink_end: float, commit: bool = True) -> AckWindow:
        """
        Decide in which window the ACK for an uplink ending at uplink_end goes.

        Args:
            uplink_end: End of the uplink transmission (s)
            commit: Record the downlink against the duty-cycle budget

        Returns:
            The window carrying the ACK, or AckWindow.NONE
        """
        if self.spec.traffic == TrafficType.UNCONFIRMED or self.spec.ack_window == AckWindow.NONE:
            return AckWindow.NONE

        candidates = [self.spec.ack_window]
        if self.spec.ack_window == AckWindow.RX1:
            candidates.append(AckWindow.RX2)

        for window in candidates:
            start = self._window_start(window, uplink_end)
            if downlink_allowed(self.state, start, window):
                if commit:
                    self.state = record_downlink(
                        self.state, start, ack_airtime(self.spec, window), self._duty_cycle(window), window
                    )
                    if window != self.spec.ack_window:
                        logger.debug(f"ACK moved to {window.value} by the downlink duty cycle")
                return window

        if commit:
            logger.debug(f"no ACK for uplink ending at {uplink_end:.3f}s: downlink duty cycle exhausted")
        return AckWindow.NONE


def gateway_respond(spec: TxCycleSpec, uplink_end: float = 0.0,
                    gateway: Optional[GatewayService] = None) -> AckWindow:
    """Stateless convenience wrapper; uses a fresh gateway unless one is given."""
    gateway = gateway or GatewayService(spec)
    return gateway.respond(uplink_end)
