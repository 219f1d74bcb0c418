"""
Harvest trace container and estimator state.
"""

import math
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.utils.exceptions import DomainError


class HarvestTrace:
    """
    Piecewise-constant (zero-order hold) harvested-power signal.

    Sample k holds from times[k] until times[k+1]; the last sample holds
    forever. Powers are stored canonically in mW so that a file round-trip
    is exact; the watt view is derived once.
    """

    def __init__(self, times_s, powers_mw, powers_w=None):
        times = np.asarray(times_s, dtype=float).copy()
        powers_mw = np.asarray(powers_mw, dtype=float).copy()

        if times.ndim != 1 or times.size == 0:
            raise DomainError("a trace needs at least one sample")
        if powers_mw.shape != times.shape:
            raise DomainError("timestamps and powers must have the same length")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(powers_mw)):
            raise DomainError("trace contains non-finite values")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise DomainError("trace timestamps must be strictly increasing")
        if np.any(powers_mw < 0):
            raise DomainError("harvested power cannot be negative")

        if powers_w is None:
            powers_w = powers_mw * 1e-3
        else:
            powers_w = np.asarray(powers_w, dtype=float).copy()

        # Energy accumulated from times[0] up to each sample instant
        cumulative = np.zeros_like(times)
        if times.size > 1:
            cumulative[1:] = np.cumsum(powers_w[:-1] * np.diff(times))

        for arr in (times, powers_mw, powers_w, cumulative):
            arr.setflags(write=False)
        self._times = times
        self._powers_mw = powers_mw
        self._powers_w = powers_w
        self._cumulative_j = cumulative

    @classmethod
    def from_watts(cls, times_s, powers_w) -> "HarvestTrace":
        powers_w = np.asarray(powers_w, dtype=float)
        return cls(times_s, powers_w * 1e3, powers_w=powers_w)

    @property
    def times(self) -> np.ndarray:
        return self._times

    @property
    def powers_mw(self) -> np.ndarray:
        return self._powers_mw

    @property
    def powers_w(self) -> np.ndarray:
        return self._powers_w

    @property
    def start(self) -> float:
        return float(self._times[0])

    @property
    def end(self) -> float:
        return float(self._times[-1])

    def __len__(self) -> int:
        return int(self._times.size)

    def __repr__(self) -> str:
        return f"HarvestTrace(samples={len(self)}, start={self.start}, end={self.end})"

    def index_at(self, t: float) -> int:
        if t < self._times[0]:
            raise DomainError(f"t={t} precedes the first trace sample at {self.start}")
        return int(np.searchsorted(self._times, t, side="right")) - 1

    def energy_until(self, t: float) -> float:
        """Energy in joules harvested between the first sample and t."""
        k = self.index_at(t)
        return float(self._cumulative_j[k] + self._powers_w[k] * (t - self._times[k]))

    def segments(self, t_start: float, t_end: float) -> Iterator[Tuple[float, float]]:
        """Yield (duration, power_w) pieces covering [t_start, t_end)."""
        k = self.index_at(t_start)
        now = t_start
        n = self._times.size
        while now < t_end:
            nxt = self._times[k + 1] if k + 1 < n else math.inf
            seg_end = min(nxt, t_end)
            yield seg_end - now, float(self._powers_w[k])
            now = seg_end
            k += 1

    def next_sample_after(self, t: float) -> float:
        k = int(np.searchsorted(self._times, t, side="right"))
        return float(self._times[k]) if k < self._times.size else math.inf


class WindowStats(BaseModel):
    mean_w: float = Field(ge=0)
    min_w: float = Field(ge=0)
    window_s: float = Field(gt=0)


class EwmaEstimator(BaseModel):
    """Mean/deviation tracker for the AVES prediction P = max(A - D, 0)."""
    gain: float = Field(default=0.1, gt=0, le=1)
    window_s: Optional[float] = Field(default=None, gt=0)
    mean_a: float = 0.0
    deviation_d: float = Field(default=0.0, ge=0)
    initialized: bool = False


class TraceSourceKind(str, Enum):
    CONSTANT = "constant"
    FILE = "file"
    SYNTHETIC = "synthetic"
    INLINE = "inline"


class TraceSource(BaseModel):
    """Where a scenario's harvest trace comes from."""
    kind: TraceSourceKind
    power_mw: Optional[float] = Field(default=None, ge=0)
    path: Optional[str] = None
    mean_mw: Optional[float] = Field(default=None, ge=0)
    std_mw: Optional[float] = Field(default=None, ge=0)
    tau_s: Optional[float] = Field(default=None, ge=0)
    seed: int = 0
    dt_s: Optional[float] = Field(default=None, gt=0)
    # (time_s, power_mW) pairs for INLINE
    samples: List[Tuple[float, float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_fields(self):
        required = {
            TraceSourceKind.CONSTANT: ["power_mw"],
            TraceSourceKind.FILE: ["path"],
            TraceSourceKind.SYNTHETIC: ["mean_mw", "std_mw", "tau_s"],
        }.get(self.kind, [])
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind.value} trace source needs {', '.join(missing)}")
        if self.kind == TraceSourceKind.INLINE and not self.samples:
            raise ValueError("inline trace source needs samples")
        return self

    @classmethod
    def constant(cls, power_mw: float) -> "TraceSource":
        return cls(kind=TraceSourceKind.CONSTANT, power_mw=power_mw)

    @classmethod
    def synthetic(cls, mean_mw: float, std_mw: float, tau_s: float, seed: int = 0) -> "TraceSource":
        return cls(kind=TraceSourceKind.SYNTHETIC, mean_mw=mean_mw, std_mw=std_mw, tau_s=tau_s, seed=seed)

    @classmethod
    def from_file(cls, path: str) -> "TraceSource":
        return cls(kind=TraceSourceKind.FILE, path=str(path))

    @classmethod
    def inline(cls, samples) -> "TraceSource":
        return cls(kind=TraceSourceKind.INLINE, samples=[(float(t), float(p)) for t, p in samples])

    def describe(self) -> str:
        if self.kind == TraceSourceKind.CONSTANT:
            return f"constant:{self.power_mw}mW"
        if self.kind == TraceSourceKind.FILE:
            return f"file:{self.path}"
        if self.kind == TraceSourceKind.SYNTHETIC:
            return f"synth:{self.mean_mw},{self.std_mw},{self.tau_s},{self.seed}"
        return f"inline:{len(self.samples)}"


# Published moments of four measured indoor/outdoor traces (mean, std in mW);
# synth_stochastic with these targets gives comparable stand-ins.
TRACE_PRESETS = {
    "A": (7.2, 8.2),
    "B": (4.0, 2.0),
    "C": (27.5, 8.1),
    "D": (3.8, 3.3),
}
