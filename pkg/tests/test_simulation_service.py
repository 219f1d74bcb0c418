"""
Event engine: lifecycle, invariants, determinism and sweeps.
"""
import pytest

from app.models.energy import DeviceState
from app.models.schemas import EventKind
from app.models.traces import TraceSource
from app.services.metrics_service import time_fractions, write_report
from app.services.simulation_service import run_events, run_scenario, sweep
from app.utils.exceptions import ConfigurationError

RADIO_STATES = {DeviceState.TX, DeviceState.IDLE, DeviceState.RX1, DeviceState.RX2}


def _check_invariants(log, v_low):
    times = [r.time for r in log.records]
    assert times == sorted(times)

    powered = False
    in_cycle = False
    for record in log.records:
        if record.kind == EventKind.STATE:
            if record.state == DeviceState.WAKEUP:
                powered = True
            elif record.state in (DeviceState.OFF, DeviceState.CHARGING):
                powered = False
            elif record.state in RADIO_STATES:
                assert powered
        elif record.kind == EventKind.SEND:
            assert powered
            assert not in_cycle
            assert record.voltage >= v_low
            in_cycle = True
        elif record.kind in (EventKind.CYCLE_COMPLETE, EventKind.OFF):
            in_cycle = False


def test_zero_harvest_from_empty_capacitor_never_activates(make_scenario):
    config = make_scenario("us", power_mw=0.0, horizon_s=600.0, initial_voltage=0.0)
    log, report = run_scenario(config)

    assert report.packets_sent == 0
    assert report.charging_fraction == 1.0
    assert [r.kind for r in log.records] == [EventKind.STATE]
    assert log.records[0].state == DeviceState.CHARGING


def test_full_capacitor_activates_immediately(make_scenario):
    log = run_events(make_scenario("cs", power_mw=20.0, horizon_s=60.0, initial_voltage=3.0))
    states = [r for r in log.records if r.kind == EventKind.STATE]
    assert states[1].state == DeviceState.WAKEUP
    assert states[1].time == 0.0
    assert log.of_kind(EventKind.GENERATED)[0].time == 0.0
    assert log.of_kind(EventKind.GENERATED)[0].detail == "activation"
    later = {r.detail for r in log.of_kind(EventKind.GENERATED)[1:]}
    assert "" in later
    assert "activation" not in later


def test_zero_harvest_voltage_never_rises(make_scenario):
    log = run_events(make_scenario("us", power_mw=0.0, horizon_s=600.0, initial_voltage=3.0))
    voltages = [r.voltage for r in log.records]
    assert all(b <= a + 1e-12 for a, b in zip(voltages, voltages[1:]))
    assert log.of_kind(EventKind.OFF)


def test_unaware_device_switches_off_and_recovers(make_scenario):
    config = make_scenario("us", power_mw=1.0, horizon_s=3600.0)
    log, report = run_scenario(config)

    _check_invariants(log, config.thresholds.v_th_low)
    assert report.switch_offs > 0
    assert report.packets_sent > 0
    assert report.drops["dc"] > 0
    wakeups = [r for r in log.records if r.kind == EventKind.STATE and r.state == DeviceState.WAKEUP]
    assert len(wakeups) == report.switch_offs + 1 or len(wakeups) == report.switch_offs
    assert sum(time_fractions(log)) == pytest.approx(1.0, abs=1e-9)


def test_switch_off_happens_at_the_threshold(make_scenario):
    config = make_scenario("us", power_mw=1.0, horizon_s=3600.0)
    log = run_events(config)
    offs = log.of_kind(EventKind.OFF)
    assert offs
    for record in offs:
        assert record.voltage == pytest.approx(config.thresholds.v_th_low, abs=1e-9)


def test_generation_is_suspended_while_off(make_scenario):
    log = run_events(make_scenario("us", power_mw=1.0, horizon_s=3600.0))
    powered = False
    for record in log.records:
        if record.kind == EventKind.STATE:
            powered = record.state.is_powered
        elif record.kind == EventKind.GENERATED:
            assert powered


def test_first_generation_after_power_up_is_marked(make_scenario):
    log = run_events(make_scenario("us", power_mw=1.0, horizon_s=3600.0))
    wakeups = [r.time for r in log.records if r.kind == EventKind.STATE and r.state == DeviceState.WAKEUP]
    generated = log.of_kind(EventKind.GENERATED)
    activations = [r.time for r in generated if r.detail == "activation"]

    assert len(wakeups) > 1
    assert len(activations) >= len(wakeups) - 1
    assert activations == wakeups[:len(activations)]


def test_generation_while_off_drops_packets(make_scenario):
    log, report = run_scenario(make_scenario("us", power_mw=2.0, horizon_s=600.0, generate_while_off=True))
    first = log.of_kind(EventKind.GENERATED)[0]
    assert first.time == 0.0
    assert first.state == DeviceState.CHARGING
    assert report.drops["off"] > 0
    assert all(r.detail != "activation" for r in log.of_kind(EventKind.GENERATED))


def test_conservative_policy_regenerates_at_duty_cycle_release(make_scenario):
    log = run_events(make_scenario("cs", power_mw=50.0, horizon_s=300.0, initial_voltage=3.0))
    regenerated = [r for r in log.of_kind(EventKind.GENERATED) if r.detail == "regenerated"]
    assert regenerated
    sends = [r.time for r in log.of_kind(EventKind.SEND)]
    # With ample energy sends follow each other at the duty-cycle spacing
    gaps = [b - a for a, b in zip(sends, sends[1:])]
    assert min(gaps) == pytest.approx(5.146, rel=0.005)


def test_confirmed_traffic_logs_acknowledgements(make_scenario):
    log = run_events(make_scenario("cs", power_mw=20.0, horizon_s=300.0, traffic="confirmed"))
    acks = log.of_kind(EventKind.ACK)
    assert acks
    assert all(r.detail == "rx1" for r in acks)
    assert not [r for r in log.records if r.kind == EventKind.STATE and r.state == DeviceState.RX2]


def test_sends_rotate_over_uplink_channels(make_scenario):
    log = run_events(make_scenario("cs", power_mw=50.0, horizon_s=120.0, initial_voltage=3.0))
    channels = [r.detail.split()[0] for r in log.of_kind(EventKind.SEND)]
    assert channels[:4] == ["868.1MHz", "868.3MHz", "868.5MHz", "868.1MHz"]


def test_runs_are_deterministic(make_scenario, tmp_path):
    config = make_scenario(
        "aves", trace=TraceSource.synthetic(5.0, 3.0, 20.0, seed=3), horizon_s=1800.0
    )
    log_a, report_a = run_scenario(config)
    log_b, report_b = run_scenario(config)

    assert log_a.records == log_b.records
    write_report([report_a], tmp_path / "a.csv")
    write_report([report_b], tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_trace_must_start_at_zero(make_scenario):
    config = make_scenario("cs", trace=TraceSource.inline([(5.0, 2.0), (10.0, 2.0)]))
    with pytest.raises(ConfigurationError):
        run_events(config)


def test_short_trace_holds_its_last_value(make_scenario):
    config = make_scenario("cs", trace=TraceSource.inline([(0.0, 20.0), (100.0, 20.0)]), horizon_s=600.0)
    log, report = run_scenario(config)
    assert report.packets_sent > 0
    assert log.records[-1].time > 100.0


def test_sweep_keeps_input_order(make_scenario):
    configs = [
        make_scenario("us", power_mw=3.0, horizon_s=900.0),
        make_scenario("cs", power_mw=3.0, horizon_s=900.0),
        make_scenario("fs", power_mw=10.0, horizon_s=900.0),
    ]
    forward = sweep(configs)
    backward = sweep(list(reversed(configs)))

    assert [r.index for r in forward] == [0, 1, 2]
    assert all(r.ok for r in forward)
    for a, b in zip(forward, reversed(backward)):
        assert a.report == b.report


def test_parallel_sweep_matches_serial(make_scenario):
    configs = [make_scenario(name, power_mw=4.0, horizon_s=600.0) for name in ("us", "cs", "as:5", "os")]
    serial = sweep(configs, workers=1)
    parallel = sweep(configs, workers=2, backend="threading")
    assert [r.report for r in parallel] == [r.report for r in serial]


def test_sweep_reports_failures_per_entry(make_scenario, tmp_path):
    good = make_scenario("cs", horizon_s=300.0)
    bad = make_scenario("cs", trace=TraceSource.from_file(str(tmp_path / "missing.csv")), horizon_s=300.0)
    results = sweep([good, bad])
    assert results[0].ok
    assert not results[1].ok
    assert "not found" in results[1].error


def test_empty_sweep():
    assert sweep([]) == []
