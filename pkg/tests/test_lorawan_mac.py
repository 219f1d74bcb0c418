"""
Airtime, duty-cycle gate, Class A timelines and the gateway.
"""
import pytest

from app.models.energy import DeviceState
from app.models.lorawan import (
    AckWindow,
    ChannelPlan,
    DutyCycleState,
    RadioParams,
    TrafficType,
    TxCycleSpec,
)
from app.services.gateway_service import GatewayService, gateway_respond
from app.services.lorawan_mac import (
    REFERENCE_AIRTIMES_MS,
    build_cycle_timeline,
    downlink_allowed,
    duty_cycle_gate,
    min_tx_interval,
    record_downlink,
    record_uplink,
    time_on_air,
)
from app.utils.exceptions import DomainError, SimulationLogicError

SF7_SYMBOL = 2 ** 7 / 125_000.0
SF12_SYMBOL = 2 ** 12 / 125_000.0


@pytest.mark.parametrize("sf,payload", sorted(REFERENCE_AIRTIMES_MS))
def test_time_on_air_matches_published_table(sf, payload):
    expected = REFERENCE_AIRTIMES_MS[(sf, payload)]
    toa_ms = time_on_air(RadioParams(spreading_factor=sf), payload) * 1e3
    assert toa_ms == pytest.approx(expected, rel=0.005)


def test_time_on_air_grows_with_payload_and_spreading_factor():
    for sf in range(7, 13):
        radio = RadioParams(spreading_factor=sf)
        airtimes = [time_on_air(radio, payload) for payload in (0, 10, 20, 40, 51)]
        assert airtimes == sorted(airtimes)
        assert len(set(airtimes)) == len(airtimes)
    for payload in (0, 5, 51):
        airtimes = [time_on_air(RadioParams(spreading_factor=sf), payload) for sf in range(7, 13)]
        assert all(b > a for a, b in zip(airtimes, airtimes[1:]))


def test_time_on_air_rejects_oversized_payload():
    with pytest.raises(DomainError):
        time_on_air(RadioParams(spreading_factor=12), 52)
    with pytest.raises(DomainError):
        time_on_air(RadioParams(spreading_factor=7), 223)


def test_min_tx_interval():
    assert min_tx_interval(0.05146, 0.01) == pytest.approx(5.146)
    assert min_tx_interval(0.11802, 0.01) == pytest.approx(11.802)
    assert min_tx_interval(0.05146, 1.0) == 0.05146


def test_duty_cycle_gate():
    fresh = DutyCycleState()
    assert duty_cycle_gate(fresh, 0.0).allowed
    assert duty_cycle_gate(fresh, 1234.5).allowed

    state = record_uplink(fresh, 0.0, 0.05146, 0.01)
    blocked = duty_cycle_gate(state, 3.0)
    assert not blocked.allowed
    assert blocked.blocked_until == pytest.approx(5.146)
    assert duty_cycle_gate(state, state.next_allowed_uplink_start).allowed


def test_record_uplink():
    assert record_uplink(DutyCycleState(), 0.0, 0.04634).next_allowed_uplink_start == pytest.approx(4.634)
    state = DutyCycleState(next_allowed_uplink_start=50.0)
    assert record_uplink(state, 100.0, 0.05146).next_allowed_uplink_start == pytest.approx(105.146)
    assert record_uplink(DutyCycleState(), 7.0, 0.0).next_allowed_uplink_start == 7.0


def test_record_uplink_inside_silent_period_is_a_logic_error():
    state = record_uplink(DutyCycleState(), 0.0, 0.05146)
    with pytest.raises(SimulationLogicError):
        record_uplink(state, 2.0, 0.05146)


def test_gated_transmissions_respect_the_duty_cycle():
    toa = 0.05146
    state = DutyCycleState()
    starts = []
    t = 0.0
    while t < 3600.0:
        if duty_cycle_gate(state, t).allowed:
            state = record_uplink(state, t, toa)
            starts.append(t)
        t += 0.37
    elapsed = starts[-1] + toa
    assert len(starts) * toa / elapsed <= 0.01 + toa / elapsed


def _states(timeline):
    return [step.state for step in timeline]


def test_unconfirmed_timeline_opens_both_windows():
    spec = TxCycleSpec(payload_bytes=5)
    toa = time_on_air(spec.radio, 5)
    timeline = build_cycle_timeline(spec, toa)

    assert _states(timeline) == [
        DeviceState.TX, DeviceState.IDLE, DeviceState.RX1,
        DeviceState.IDLE, DeviceState.RX2, DeviceState.SLEEP,
    ]
    durations = [step.duration for step in timeline]
    assert durations[0] == pytest.approx(0.05146, rel=0.005)
    assert durations[1] == 1.0
    assert durations[2] == pytest.approx(5 * SF7_SYMBOL)
    assert durations[3] == pytest.approx(1.0 - 5 * SF7_SYMBOL)
    assert durations[4] == pytest.approx(5 * SF12_SYMBOL)
    assert durations[5] == 0.0
    assert sum(durations) >= spec.rx2_delay_s + 5 * SF12_SYMBOL


def test_confirmed_rx1_timeline_skips_rx2():
    spec = TxCycleSpec(traffic=TrafficType.CONFIRMED, ack_window=AckWindow.RX1)
    timeline = build_cycle_timeline(spec, time_on_air(spec.radio, 5))

    assert _states(timeline) == [DeviceState.TX, DeviceState.IDLE, DeviceState.RX1, DeviceState.SLEEP]
    assert timeline[2].duration == pytest.approx(time_on_air(spec.radio, 0))


def test_confirmed_rx2_timeline_receives_at_rx2_spreading_factor():
    spec = TxCycleSpec(traffic=TrafficType.CONFIRMED, ack_window=AckWindow.RX2)
    timeline = build_cycle_timeline(spec, time_on_air(spec.radio, 5))

    assert timeline[-2].state == DeviceState.RX2
    assert timeline[-2].duration == pytest.approx(time_on_air(RadioParams(spreading_factor=12), 0))


def test_rx2_spreading_factor_override():
    spec = TxCycleSpec(channel_plan=ChannelPlan(rx2_spreading_factor=7))
    timeline = build_cycle_timeline(spec, time_on_air(spec.radio, 5))
    assert timeline[-2].duration == pytest.approx(5 * SF7_SYMBOL)


def test_timeline_always_ends_in_sleep():
    for traffic in TrafficType:
        for window in AckWindow:
            spec = TxCycleSpec(traffic=traffic, ack_window=window)
            timeline = build_cycle_timeline(spec, 0.1)
            assert timeline[-1].state == DeviceState.SLEEP


def test_gateway_acknowledges_confirmed_traffic():
    confirmed = TxCycleSpec(traffic=TrafficType.CONFIRMED)
    assert gateway_respond(confirmed) == AckWindow.RX1
    assert gateway_respond(TxCycleSpec(traffic=TrafficType.UNCONFIRMED)) == AckWindow.NONE
    rx2 = TxCycleSpec(traffic=TrafficType.CONFIRMED, ack_window=AckWindow.RX2)
    assert gateway_respond(rx2) == AckWindow.RX2
    assert rx2.channel_plan.rx2_channel_mhz == 869.525


def test_gateway_falls_back_to_rx2_when_rx1_is_blocked():
    gateway = GatewayService(TxCycleSpec(traffic=TrafficType.CONFIRMED))
    assert gateway.respond(0.0) == AckWindow.RX1
    # The RX1 answer opened at 1 s and blocks RX1 for ack_airtime / 1 %
    rx1_blocked_until = gateway.state.next_allowed_rx1_downlink_start
    assert rx1_blocked_until == pytest.approx(1.0 + time_on_air(RadioParams(), 0) / 0.01)
    assert gateway.state.next_allowed_rx2_downlink_start == 0.0

    # RX1 at 3 s is blocked, RX2 at 4 s has its own budget
    assert gateway.respond(2.0, commit=False) == AckWindow.RX2
    assert gateway.state.next_allowed_rx2_downlink_start == 0.0
    assert gateway.respond(2.0) == AckWindow.RX2
    assert gateway.state.next_allowed_rx1_downlink_start == rx1_blocked_until
    rx2_airtime = time_on_air(RadioParams(spreading_factor=12), 0)
    assert gateway.state.next_allowed_rx2_downlink_start == pytest.approx(4.0 + rx2_airtime / 0.1)

    assert gateway.respond(2.5) == AckWindow.NONE
    # The 1 % RX1 budget frees up before the 10 % RX2 budget
    assert gateway.respond(4.7) == AckWindow.RX1


def test_downlink_budgets_are_kept_per_window():
    state = record_downlink(DutyCycleState(), 4.0, 1.155, 0.1, AckWindow.RX2)
    assert state.next_allowed_rx2_downlink_start == pytest.approx(15.55)
    assert state.next_allowed_rx1_downlink_start == 0.0
    assert downlink_allowed(state, 5.0, AckWindow.RX1)
    assert not downlink_allowed(state, 5.0, AckWindow.RX2)

    with pytest.raises(SimulationLogicError):
        record_downlink(state, 5.0, 1.155, 0.1, AckWindow.RX2)
    with pytest.raises(DomainError):
        record_downlink(state, 5.0, 0.05, 0.01, AckWindow.NONE)
