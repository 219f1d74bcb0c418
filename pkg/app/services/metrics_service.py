"""
Metrics over an event log and CSV result files.
"""

import logging
import math
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from app.config.settings import settings
from app.models.energy import DeviceState
from app.models.schemas import (
    CONFIG_COLUMNS,
    DropReason,
    EventKind,
    EventLog,
    MetricsReport,
    ScenarioConfig,
)
from app.utils.exceptions import DomainError, ReportError

logger = logging.getLogger(__name__)

METRIC_COLUMNS = [
    "packets_sent", "p_max", "efficiency_pct", "on_fraction", "off_fraction",
    "charging_fraction", "mean_inter_tx_s", "stddev_inter_tx_s",
]
SERIES_COLUMNS = ["scenario", "bucket_start_s", "packets"]
EVENT_COLUMNS = ["time_s", "kind", "state", "voltage_v", "detail"]


def efficiency(packets_sent: int, sim_time_s: float, t_packet_s: float,
               duty_cycle: float = 0.01) -> Tuple[float, int]:
    """
    Packets sent as a percentage of the duty-cycle maximum over sim_time_s.

    Returns:
        (efficiency in percent, p_max floored to an integer)
    """
    if sim_time_s <= 0 or t_packet_s <= 0:
        raise DomainError("simulated time and packet airtime must be positive")
    if packets_sent < 0:
        raise DomainError(f"packet count cannot be negative: {packets_sent}")
    p_max = sim_time_s * duty_cycle / t_packet_s
    return 100.0 * packets_sent / p_max, int(math.floor(p_max + 1e-9))


def inter_tx_stats(send_times: Sequence[float]) -> Tuple[Optional[float], Optional[float]]:
    """Mean and population standard deviation of successive send-start gaps."""
    if len(send_times) < 2:
        return None, None
    gaps = np.diff(np.asarray(send_times, dtype=float))
    return float(gaps.mean()), float(gaps.std())


def completed_send_times(log: EventLog) -> List[float]:
    """Start times of uplinks whose Tx segment finished."""
    times = []
    started = None
    for record in log.records:
        if record.kind == EventKind.SEND:
            started = record.time
        elif record.kind == EventKind.TX_COMPLETE and started is not None:
            times.append(started)
            started = None
        elif record.kind == EventKind.OFF:
            started = None
    return times


def time_fractions(log: EventLog) -> Tuple[float, float, float]:
    """(on, off, charging) shares of the horizon."""
    spent = {DeviceState.CHARGING: 0.0, DeviceState.OFF: 0.0}
    on = 0.0
    last_time, last_state = 0.0, DeviceState.CHARGING
    for record in log.records:
        if record.kind != EventKind.STATE:
            continue
        # The record's state is the state just entered
        duration = record.time - last_time
        if last_state in spent:
            spent[last_state] += duration
        else:
            on += duration
        last_time, last_state = record.time, record.state
    tail = log.horizon - last_time
    if last_state in spent:
        spent[last_state] += tail
    else:
        on += tail
    total = on + spent[DeviceState.OFF] + spent[DeviceState.CHARGING]
    return on / total, spent[DeviceState.OFF] / total, spent[DeviceState.CHARGING] / total


def interval_counts(send_times: Sequence[float], horizon_s: float,
                    bucket_s: Optional[float] = None) -> List[int]:
    bucket_s = bucket_s or settings.REPORT_BUCKET_S
    n_buckets = max(int(math.ceil(horizon_s / bucket_s)), 1)
    counts = np.zeros(n_buckets, dtype=int)
    for t in send_times:
        counts[min(int(t // bucket_s), n_buckets - 1)] += 1
    return counts.tolist()


def compute_metrics(log: EventLog, config: ScenarioConfig, t_packet_s: float,
                    bucket_s: Optional[float] = None) -> MetricsReport:
    bucket_s = bucket_s or settings.REPORT_BUCKET_S
    sends = completed_send_times(log)
    eff, p_max = efficiency(len(sends), log.horizon, t_packet_s, config.uplink_duty_cycle)
    mean_gap, std_gap = inter_tx_stats(sends)
    on, off, charging = time_fractions(log)

    drops = {reason.value: 0 for reason in DropReason}
    switch_offs = 0
    for record in log.records:
        if record.kind == EventKind.DROP:
            drops[record.detail] += 1
        elif record.kind == EventKind.OFF:
            switch_offs += 1

    return MetricsReport(
        packets_sent=len(sends),
        p_max=p_max,
        efficiency_pct=eff,
        on_fraction=on,
        off_fraction=off,
        charging_fraction=charging,
        mean_inter_tx_s=mean_gap,
        stddev_inter_tx_s=std_gap,
        t_packet_s=t_packet_s,
        switch_offs=switch_offs,
        drops=drops,
        interval_counts=interval_counts(sends, log.horizon, bucket_s),
        bucket_s=bucket_s,
        config=config.echo(),
    )


def report_frame(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        row = {column: report.config.get(column) for column in CONFIG_COLUMNS}
        row.update({column: getattr(report, column) for column in METRIC_COLUMNS})
        rows.append(row)
    return pd.DataFrame(rows, columns=CONFIG_COLUMNS + METRIC_COLUMNS)


def series_frame(reports: Sequence[MetricsReport]) -> pd.DataFrame:
    rows = [
        (index, k * report.bucket_s, count)
        for index, report in enumerate(reports)
        for k, count in enumerate(report.interval_counts)
    ]
    return pd.DataFrame(rows, columns=SERIES_COLUMNS)


def write_report(
    reports: Sequence[MetricsReport],
    path: Union[str, Path],
    series_path: Optional[Union[str, Path]] = None
) -> Path:
    """
    Write one CSV row per scenario, and optionally the per-interval packet series.

    Raises:
        ReportError: if a file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        report_frame(reports).to_csv(path, index=False)
        logger.info(f"Wrote {len(reports)} result rows to {path}")
        if series_path is not None:
            series_path = Path(series_path)
            series_path.parent.mkdir(parents=True, exist_ok=True)
            series_frame(reports).to_csv(series_path, index=False)
            logger.info(f"Wrote packet series to {series_path}")
    except OSError as e:
        logger.error(f"Failed to write results: {str(e)}")
        raise ReportError(f"Failed to write results to {path}: {str(e)}")
    return path


def read_report(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def write_event_log(log: EventLog, path: Union[str, Path]) -> Path:
    """One line per event: time, kind, state, voltage, detail."""
    path = Path(path)
    frame = pd.DataFrame(
        [(r.time, r.kind.value, r.state.value, r.voltage, r.detail) for r in log.records],
        columns=EVENT_COLUMNS,
    )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    except OSError as e:
        logger.error(f"Failed to write event log: {str(e)}")
        raise ReportError(f"Failed to write event log to {path}: {str(e)}")
    logger.info(f"Wrote {len(log)} events to {path}")
    return path
