import pandas as pd
import pytest

from app.models.energy import DeviceState
from app.models.schemas import CONFIG_COLUMNS, EventKind, EventLog, EventRecord
from app.services.metrics_service import (
    CONFIG_COLUMNS,
    METRIC_COLUMNS,
    completed_send_times,
    compute_metrics,
    efficiency,
    inter_tx_stats,
    interval_counts,
    read_report,
    time_fractions,
    write_event_log,
    write_report,
)
from app.utils.exceptions import DomainError, ReportError

TOA = 0.05146


def _state(t, state, v=2.0):
    return EventRecord(t, EventKind.STATE, state, v)


def _event(t, kind, state, v=2.0, detail=""):
    return EventRecord(t, kind, state, v, detail)


@pytest.fixture
def fabricated_log():
    """Charging until 20 s, on until 60 s, off until 80 s, on again to 100 s."""
    records = [
        _state(0.0, DeviceState.CHARGING, 0.0),
        _state(20.0, DeviceState.WAKEUP, 3.0),
        _state(20.01, DeviceState.SLEEP),
        _event(20.01, EventKind.GENERATED, DeviceState.SLEEP),
        _event(20.01, EventKind.SEND, DeviceState.SLEEP, detail="868.1MHz ack=none"),
        _state(20.01, DeviceState.TX),
        _event(20.06, EventKind.TX_COMPLETE, DeviceState.TX),
        _state(20.06, DeviceState.IDLE),
        _state(22.2, DeviceState.SLEEP),
        _event(24.01, EventKind.DROP, DeviceState.SLEEP, detail="dc"),
        _event(30.0, EventKind.SEND, DeviceState.SLEEP, detail="868.3MHz ack=none"),
        _state(30.0, DeviceState.TX),
        _event(30.05, EventKind.TX_COMPLETE, DeviceState.TX),
        _state(30.05, DeviceState.SLEEP),
        # Switched off during Tx: this uplink does not count
        _event(59.9, EventKind.SEND, DeviceState.SLEEP, detail="868.5MHz ack=none"),
        _state(59.9, DeviceState.TX),
        _event(60.0, EventKind.OFF, DeviceState.TX, 1.8),
        _state(60.0, DeviceState.OFF, 1.8),
        _state(80.0, DeviceState.WAKEUP, 3.0),
        _state(80.01, DeviceState.SLEEP, 3.0),
    ]
    return EventLog(horizon=100.0, records=records)


def test_efficiency_against_the_duty_cycle_maximum():
    eff, p_max = efficiency(6296, 32400.0, TOA)
    assert p_max == 6296
    assert eff == pytest.approx(100.0, abs=0.01)

    half, _ = efficiency(3148, 32400.0, TOA)
    assert half == pytest.approx(50.0, abs=0.01)
    assert efficiency(0, 32400.0, TOA)[0] == 0.0


def test_efficiency_rejects_bad_inputs():
    with pytest.raises(DomainError):
        efficiency(10, 0.0, TOA)
    with pytest.raises(DomainError):
        efficiency(10, 100.0, 0.0)
    with pytest.raises(DomainError):
        efficiency(-1, 100.0, TOA)


def test_inter_tx_stats():
    assert inter_tx_stats([10.0, 15.0, 25.0]) == (pytest.approx(7.5), pytest.approx(2.5))
    mean, std = inter_tx_stats([0.0, 6.0, 12.0, 18.0])
    assert mean == pytest.approx(6.0)
    assert std == pytest.approx(0.0)
    assert inter_tx_stats([42.0]) == (None, None)
    assert inter_tx_stats([]) == (None, None)


def test_send_without_tx_complete_is_not_counted(fabricated_log):
    assert completed_send_times(fabricated_log) == [20.01, 30.0]


def test_time_fractions(fabricated_log):
    on, off, charging = time_fractions(fabricated_log)
    assert charging == pytest.approx(0.2)
    assert off == pytest.approx(0.2)
    assert on == pytest.approx(0.6)


def test_interval_counts():
    assert interval_counts([1.0, 119.9, 120.0, 350.0], 360.0, 120.0) == [2, 1, 1]
    # A send at the horizon falls into the last bucket
    assert interval_counts([360.0], 360.0, 120.0) == [0, 0, 1]
    assert interval_counts([], 100.0, 120.0) == [0]


def test_compute_metrics(fabricated_log, make_scenario):
    config = make_scenario("us", horizon_s=100.0)
    report = compute_metrics(fabricated_log, config, TOA, bucket_s=50.0)

    assert report.packets_sent == 2
    assert report.switch_offs == 1
    assert report.drops["dc"] == 1
    assert report.drops["off"] == 0
    assert report.mean_inter_tx_s == pytest.approx(9.99)
    assert report.interval_counts == [2, 0]
    assert sum(report.interval_counts) == report.packets_sent
    assert report.on_fraction + report.off_fraction + report.charging_fraction == pytest.approx(1.0)
    assert report.config["scheduler"] == "us"


def test_empty_report_is_header_only(tmp_path):
    path = write_report([], tmp_path / "empty.csv")
    lines = path.read_text().splitlines()
    assert lines == [",".join(CONFIG_COLUMNS + METRIC_COLUMNS)]


def test_report_round_trip(fabricated_log, make_scenario, tmp_path):
    report = compute_metrics(fabricated_log, make_scenario("cs", horizon_s=100.0), TOA)
    path = write_report([report], tmp_path / "results" / "report.csv", tmp_path / "series.csv")

    assert len(path.read_text().splitlines()) == 2
    frame = read_report(path)
    row = frame.iloc[0]
    assert row["scheduler"] == "cs"
    assert row["packets_sent"] == report.packets_sent
    assert row["efficiency_pct"] == report.efficiency_pct
    assert row["on_fraction"] == report.on_fraction
    for column in CONFIG_COLUMNS:
        expected = report.config[column]
        if expected is None:
            assert pd.isna(row[column]), column
        elif isinstance(expected, (str, bool)):
            assert row[column] == expected, column
        else:
            assert row[column] == pytest.approx(expected), column

    series = pd.read_csv(tmp_path / "series.csv")
    assert series["packets"].sum() == report.packets_sent
    assert list(series.columns) == ["scenario", "bucket_start_s", "packets"]


def test_unwritable_report_path(tmp_path):
    blocker = tmp_path / "not_a_dir"
    blocker.write_text("x")
    with pytest.raises(ReportError):
        write_report([], blocker / "report.csv")


def test_event_log_file(fabricated_log, tmp_path):
    path = write_event_log(fabricated_log, tmp_path / "events.csv")
    frame = pd.read_csv(path, keep_default_na=False)
    assert len(frame) == len(fabricated_log)
    assert list(frame["kind"].unique())[:2] == ["state", "generated"]
    assert frame.loc[frame["kind"] == "drop", "detail"].tolist() == ["dc"]
