"""
Harvest trace I/O, synthesis, windowed statistics and the EWMA estimator.
"""

import logging
import math
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from app.config.settings import settings
from app.models.traces import (
    EwmaEstimator,
    HarvestTrace,
    TraceSource,
    TraceSourceKind,
    WindowStats,
)
from app.utils.exceptions import DomainError, ReportError, TraceFormatError

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["time_s", "power_mW"]


# Sampling and windows

def power_at(trace: HarvestTrace, t: float) -> float:
    """Harvested power (W) at time t under zero-order hold."""
    return float(trace.powers_w[trace.index_at(t)])


def _window_bounds(trace: HarvestTrace, t: float, x: float):
    if x <= 0:
        raise DomainError(f"window length must be positive: {x}")
    trace.index_at(t)
    return max(t - x, trace.start), t


def window_mean(trace: HarvestTrace, t: float, x: float) -> float:
    """Time-average of P over [t - x, t], clipped to the start of the trace."""
    a, b = _window_bounds(trace, t, x)
    if b <= a:
        return power_at(trace, t)
    return (trace.energy_until(b) - trace.energy_until(a)) / (b - a)


def window_min(trace: HarvestTrace, t: float, x: float) -> float:
    """Smallest value P takes on [t - x, t)."""
    a, b = _window_bounds(trace, t, x)
    if b <= a:
        return power_at(trace, t)
    first = trace.index_at(a)
    last = int(np.searchsorted(trace.times, b, side="left")) - 1
    return float(trace.powers_w[first:last + 1].min())


def window_stats(trace: HarvestTrace, t: float, x: float) -> WindowStats:
    return WindowStats(mean_w=window_mean(trace, t, x), min_w=window_min(trace, t, x), window_s=x)


# EWMA estimator

def ewma_update(estimator: EwmaEstimator, window_mean_w: float) -> EwmaEstimator:
    """
    Fold one window mean into the estimator. The first observation seeds the
    mean with zero deviation.
    """
    if window_mean_w < 0:
        raise DomainError(f"window mean cannot be negative: {window_mean_w}")
    if not estimator.initialized:
        return estimator.model_copy(update={
            "mean_a": window_mean_w, "deviation_d": 0.0, "initialized": True
        })
    g = estimator.gain
    mean_a = g * window_mean_w + (1.0 - g) * estimator.mean_a
    deviation_d = g * abs(window_mean_w - mean_a) + (1.0 - g) * estimator.deviation_d
    return estimator.model_copy(update={"mean_a": mean_a, "deviation_d": deviation_d})


def ewma_predict(estimator: EwmaEstimator) -> float:
    if not estimator.initialized:
        return 0.0
    return max(estimator.mean_a - estimator.deviation_d, 0.0)


# Synthesis

def _sample_times(duration_s: float, dt_s: float) -> np.ndarray:
    if dt_s <= 0:
        raise DomainError(f"sample period must be positive: {dt_s}")
    if duration_s < 0:
        raise DomainError(f"duration cannot be negative: {duration_s}")
    n = int(math.floor(duration_s / dt_s + 1e-9)) + 1
    return np.arange(n, dtype=float) * dt_s


def synth_constant(power_w: float, duration_s: float, dt_s: Optional[float] = None) -> HarvestTrace:
    if power_w < 0:
        raise DomainError(f"harvested power cannot be negative: {power_w}")
    times = _sample_times(duration_s, dt_s or settings.TRACE_DT_S)
    return HarvestTrace.from_watts(times, np.full(times.shape, float(power_w)))


def synth_stochastic(
    mean_w: float,
    std_w: float,
    correlation_time_s: float,
    duration_s: float,
    dt_s: Optional[float] = None,
    seed: int = 0
) -> HarvestTrace:
    """
    Clamped AR(1) process: a unit-variance Gaussian AR(1) with coefficient
    exp(-dt/tau), scaled to std_w, shifted by mean_w and clamped at zero.
    """
    if mean_w < 0 or std_w < 0 or correlation_time_s < 0:
        raise DomainError("mean, deviation and correlation time must be non-negative")
    dt_s = dt_s or settings.TRACE_DT_S
    times = _sample_times(duration_s, dt_s)

    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(times.size)
    phi = math.exp(-dt_s / correlation_time_s) if correlation_time_s > 0 else 0.0
    scale = math.sqrt(1.0 - phi * phi)

    process = np.empty(times.size)
    process[0] = noise[0]
    if times.size > 1:
        process[1:], _ = lfilter([scale], [1.0, -phi], noise[1:], zi=[phi * noise[0]])

    powers = np.maximum(mean_w + std_w * process, 0.0)
    return HarvestTrace.from_watts(times, powers)


# File I/O

def read_trace(path: Union[str, Path]) -> HarvestTrace:
    """
    Read a ``time_s,power_mW`` CSV file. A header line is optional.

    Raises:
        TraceFormatError: if the file is missing, malformed or not monotone
    """
    path = Path(path)
    if not path.is_file():
        raise TraceFormatError(f"trace file not found: {path}")

    lines = path.read_text().splitlines()
    first = next((line for line in lines if line.strip()), None)
    if first is None:
        raise TraceFormatError(f"trace file {path} has no samples")
    header = 0 if _is_header(first) else None

    try:
        frame = pd.read_csv(
            path, header=header, names=TRACE_COLUMNS, dtype=float,
            skip_blank_lines=True, float_precision="round_trip"
        )
    except (ValueError, pd.errors.ParserError) as e:
        line_no = _first_malformed_line(lines, header is not None)
        raise TraceFormatError(
            f"malformed trace line {line_no} in {path}: {str(e)}", {"line": line_no}
        )

    if frame.empty:
        raise TraceFormatError(f"trace file {path} has no samples")
    if frame.isna().any(axis=None):
        raise TraceFormatError(f"trace file {path} has missing values")

    try:
        return HarvestTrace(frame["time_s"].to_numpy(), frame["power_mW"].to_numpy())
    except DomainError as e:
        raise TraceFormatError(f"invalid trace {path}: {e.message}")


def _is_header(line: str) -> bool:
    try:
        [float(field) for field in line.split(",")]
    except ValueError:
        return True
    return False


def _first_malformed_line(lines, has_header: bool) -> Optional[int]:
    seen_header = not has_header
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if not seen_header:
            seen_header = True
            continue
        fields = line.split(",")
        if len(fields) != 2 or _is_header(line):
            return number
    return None


def write_trace(trace: HarvestTrace, path: Union[str, Path], header: bool = False) -> Path:
    """
    Write a trace as time_s,power_mW lines, headerless unless asked.

    Raises:
        ReportError: if the file cannot be written
    """
    path = Path(path)
    frame = pd.DataFrame({"time_s": trace.times, "power_mW": trace.powers_mw})
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, header=header)
    except OSError as e:
        logger.error(f"Failed to write trace: {str(e)}")
        raise ReportError(f"Failed to write trace to {path}: {str(e)}")
    logger.info(f"Wrote {len(trace)} trace samples to {path}")
    return path


def load_trace(source: TraceSource, horizon_s: float) -> HarvestTrace:
    """Materialise a scenario's trace source."""
    dt = source.dt_s or settings.TRACE_DT_S
    if source.kind == TraceSourceKind.CONSTANT:
        trace = synth_constant(source.power_mw * 1e-3, horizon_s, dt)
    elif source.kind == TraceSourceKind.SYNTHETIC:
        trace = synth_stochastic(
            source.mean_mw * 1e-3, source.std_mw * 1e-3, source.tau_s,
            horizon_s, dt, source.seed
        )
    elif source.kind == TraceSourceKind.FILE:
        trace = read_trace(source.path)
    else:
        times, powers = zip(*source.samples)
        trace = HarvestTrace(times, powers)

    if trace.end < horizon_s and len(trace) > 1:
        logger.warning(
            f"Trace {source.describe()} ends at {trace.end:.1f}s before the {horizon_s:.1f}s horizon; "
            "holding its last value"
        )
    return trace
