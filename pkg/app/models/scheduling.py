"""
Scheduler policy descriptors and decisions.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

from pydantic import BaseModel, Field, model_validator

from app.config.settings import settings
from app.models.lorawan import TimelineStep


class SchedulerVariant(str, Enum):
    US = "us"      # unaware: send whenever the duty cycle allows
    OS = "os"      # optimal: forward simulation against the true trace
    FS = "fs"      # fixed voltage threshold
    CS = "cs"      # conservative: assumes no harvest during the cycle
    AS = "as"      # moving-average harvest over x seconds
    MINS = "mins"  # minimum harvest over x seconds
    AVES = "aves"  # EWMA of mean and deviation


class SchedulerPolicy(BaseModel):
    variant: SchedulerVariant
    v_th_fs: Optional[float] = Field(default=None, gt=0)
    window_s: Optional[float] = Field(default=None, gt=0)
    gain: Optional[float] = Field(default=None, gt=0, le=1)

    @model_validator(mode="after")
    def fill_defaults(self):
        if self.variant == SchedulerVariant.FS and self.v_th_fs is None:
            self.v_th_fs = settings.FS_V_TH
        if self.variant == SchedulerVariant.AS and self.window_s is None:
            self.window_s = settings.AS_WINDOW_S
        if self.variant == SchedulerVariant.MINS and self.window_s is None:
            self.window_s = settings.MINS_WINDOW_S
        if self.variant == SchedulerVariant.AVES and self.gain is None:
            self.gain = settings.AVES_GAIN
        return self

    @classmethod
    def parse(cls, text: str) -> "SchedulerPolicy":
        """
        Parse ``name[:params]``: ``us``, ``os``, ``cs``, ``fs:1.82``, ``as:5``,
        ``mins:5``, ``aves:0.1`` or ``aves:0.1:4``. AVES without a window uses I.
        """
        parts = [p.strip() for p in text.strip().split(":")]
        try:
            variant = SchedulerVariant(parts[0].lower())
        except ValueError:
            raise ValueError(f"unknown scheduler '{parts[0]}'")
        params = [float(p) for p in parts[1:] if p]

        if variant in (SchedulerVariant.US, SchedulerVariant.OS, SchedulerVariant.CS):
            if params:
                raise ValueError(f"scheduler '{variant.value}' takes no parameters")
            return cls(variant=variant)
        if variant == SchedulerVariant.FS:
            return cls(variant=variant, v_th_fs=params[0] if params else None)
        if variant in (SchedulerVariant.AS, SchedulerVariant.MINS):
            if len(params) > 1:
                raise ValueError(f"scheduler '{variant.value}' takes one window length")
            return cls(variant=variant, window_s=params[0] if params else None)
        if len(params) > 2:
            raise ValueError("aves takes a gain and an optional window")
        return cls(
            variant=variant,
            gain=params[0] if params else None,
            window_s=params[1] if len(params) > 1 else None,
        )

    def label(self) -> str:
        if self.variant == SchedulerVariant.FS:
            return f"fs:{self.v_th_fs:g}"
        if self.variant in (SchedulerVariant.AS, SchedulerVariant.MINS):
            return f"{self.variant.value}:{self.window_s:g}"
        if self.variant == SchedulerVariant.AVES:
            window = "" if self.window_s is None else f":{self.window_s:g}"
            return f"aves:{self.gain:g}{window}"
        return self.variant.value


class DecisionKind(str, Enum):
    SEND_NOW = "send_now"
    DEFER = "defer"
    DROP = "drop"


@dataclass(frozen=True, slots=True)
class Decision:
    kind: DecisionKind
    recheck_at: Optional[float] = None

    @classmethod
    def send_now(cls) -> "Decision":
        return cls(DecisionKind.SEND_NOW)

    @classmethod
    def defer(cls, recheck_at: float) -> "Decision":
        return cls(DecisionKind.DEFER, recheck_at)

    @classmethod
    def drop(cls) -> "Decision":
        return cls(DecisionKind.DROP)


@dataclass(frozen=True, slots=True)
class CyclePlan:
    """A Class A timeline without its zero-length terminal Sleep."""
    steps: Tuple[TimelineStep, ...]

    @classmethod
    def from_timeline(cls, timeline: Sequence[TimelineStep]) -> "CyclePlan":
        return cls(tuple(step for step in timeline if step.duration > 0))

    @property
    def duration(self) -> float:
        return sum(step.duration for step in self.steps)
