"""
Turn a RunSpec (flags plus optional config file) into scenario configurations.
"""

import itertools
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, TypeVar

from dotenv import dotenv_values
from pydantic import ValidationError

from app.models.energy import Thresholds
from app.models.lorawan import AckWindow, TrafficType
from app.models.scheduling import SchedulerPolicy, SchedulerVariant
from app.models.schemas import RunSpec, ScenarioConfig
from app.models.traces import TRACE_PRESETS, TraceSource, TraceSourceKind
from app.services.lorawan_mac import MAX_PAYLOAD_BYTES
from app.utils.exceptions import UsageError

logger = logging.getLogger(__name__)

T = TypeVar("T")

SCENARIO_KEYS = {
    "trace", "constant-mw", "synth", "capacitance-mf", "payload-b", "sf", "scheduler",
    "traffic", "ack-window", "rx2-sf", "horizon-s", "interval-s", "v-low", "v-high",
    "initial-v", "seed", "generate-while-off", "dt-s",
}
SCHEDULER_KEYS = {"fs.v_th", "as.x", "mins.x", "aves.g", "aves.x"}
TRACE_KEYS = ("trace", "constant-mw", "synth")


def _normalize_key(key: str) -> str:
    key = key.strip().lower()
    if "." in key:
        return key
    return key.replace("_", "-")


def load_config_file(path: Path) -> Dict[str, str]:
    """Read a flat ``key = value`` file; keys mirror the command-line flags."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    values = {}
    for key, value in dotenv_values(path).items():
        name = _normalize_key(key)
        if name not in SCENARIO_KEYS | SCHEDULER_KEYS:
            raise UsageError(f"unknown key '{key}' in {path}")
        if value is None or not value.strip():
            raise UsageError(f"key '{key}' in {path} has no value")
        values[name] = value.strip()
    return values


def check_trace_flags(flags: Dict[str, str]) -> None:
    given = [key for key in TRACE_KEYS if key in flags]
    if len(given) > 1:
        raise UsageError(f"conflicting trace sources: {', '.join('--' + k for k in given)}")


def merged_options(spec: RunSpec) -> Dict[str, str]:
    """Config-file values overridden by flags. A trace flag replaces any file trace source."""
    options = load_config_file(spec.config_path) if spec.config_path else {}
    check_trace_flags(options)
    if any(key in spec.overrides for key in TRACE_KEYS):
        for key in TRACE_KEYS:
            options.pop(key, None)
    options.update(spec.overrides)
    return options


def parse_list(value: str, cast: Callable[[str], T], name: str) -> List[T]:
    try:
        items = [cast(item.strip()) for item in value.split(",") if item.strip()]
    except ValueError:
        raise UsageError(f"invalid value for --{name}: '{value}'")
    if not items:
        raise UsageError(f"--{name} needs at least one value")
    return items


def parse_scalar(options: Dict[str, str], name: str, cast: Callable[[str], T],
                 default: Optional[T] = None) -> Optional[T]:
    if name not in options:
        return default
    try:
        return cast(options[name])
    except ValueError:
        raise UsageError(f"invalid value for --{name}: '{options[name]}'")


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(value)


def parse_synth(value: str) -> Tuple[float, float, float, int]:
    """
    ``mean_mW,std_mW,tau_s,seed``, or ``PRESET,tau_s,seed`` with a preset from
    TRACE_PRESETS.
    """
    head = value.split(",")[0].strip().upper()
    if head in TRACE_PRESETS:
        fields = parse_list(value.split(",", 1)[1] if "," in value else "", float, "synth")
        if len(fields) != 2:
            raise UsageError("--synth with a preset expects PRESET,tau_s,seed")
        mean, std = TRACE_PRESETS[head]
        tau, seed = fields
    else:
        fields = parse_list(value, float, "synth")
        if len(fields) != 4:
            raise UsageError("--synth expects mean_mW,std_mW,tau_s,seed or PRESET,tau_s,seed")
        mean, std, tau, seed = fields
    return mean, std, tau, int(seed)


def trace_source(options: Dict[str, str]) -> TraceSource:
    given = [key for key in TRACE_KEYS if key in options]
    if not given:
        raise UsageError("no harvest trace given: use --trace, --constant-mw or --synth")
    check_trace_flags(options)
    key = given[0]
    dt = parse_scalar(options, "dt-s", float)
    try:
        if key == "trace":
            source = TraceSource.from_file(options["trace"])
        elif key == "constant-mw":
            source = TraceSource.constant(parse_scalar(options, "constant-mw", float))
        else:
            source = TraceSource.synthetic(*parse_synth(options["synth"]))
    except ValidationError as e:
        raise UsageError(f"invalid trace source: {e.errors()[0]['msg']}")
    if dt is not None:
        source = source.model_copy(update={"dt_s": dt})
    return source


def seeded_sources(source: TraceSource, options: Dict[str, str]) -> List[TraceSource]:
    """One trace source per --seed value; --seed replaces the seed given in --synth."""
    if "seed" not in options:
        return [source]
    if source.kind != TraceSourceKind.SYNTHETIC:
        raise UsageError("--seed applies only to a synthetic trace (--synth)")
    return [source.model_copy(update={"seed": seed}) for seed in parse_list(options["seed"], int, "seed")]


def _scheduler(text: str, options: Dict[str, str]) -> SchedulerPolicy:
    try:
        policy = SchedulerPolicy.parse(text)
    except (ValueError, ValidationError) as e:
        raise UsageError(f"invalid scheduler '{text}': {str(e)}")
    if ":" in text:
        return policy

    update = {}
    if policy.variant == SchedulerVariant.FS and "fs.v_th" in options:
        update["v_th_fs"] = parse_scalar(options, "fs.v_th", float)
    elif policy.variant == SchedulerVariant.AS and "as.x" in options:
        update["window_s"] = parse_scalar(options, "as.x", float)
    elif policy.variant == SchedulerVariant.MINS and "mins.x" in options:
        update["window_s"] = parse_scalar(options, "mins.x", float)
    elif policy.variant == SchedulerVariant.AVES:
        if "aves.g" in options:
            update["gain"] = parse_scalar(options, "aves.g", float)
        if options.get("aves.x", "I").upper() != "I":
            update["window_s"] = parse_scalar(options, "aves.x", float)
    if not update:
        return policy
    try:
        return SchedulerPolicy(**{**policy.model_dump(), **update})
    except ValidationError as e:
        raise UsageError(f"invalid parameters for scheduler '{text}': {e.errors()[0]['msg']}")


def scheduler_policies(options: Dict[str, str]) -> List[SchedulerPolicy]:
    if "scheduler" not in options:
        raise UsageError("no scheduler given: use --scheduler")
    return [_scheduler(item, options) for item in parse_list(options["scheduler"], str, "scheduler")]


def _enum(cls, name: str):
    def cast(value: str):
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise UsageError(f"invalid value for --{name}: '{value}'")
    return cast


def build_scenarios(spec: RunSpec) -> List[ScenarioConfig]:
    """
    Expand list-valued options (trace seed, capacitance, payload, spreading
    factor, scheduler) into their cartesian product, in that nesting order.
    """
    options = merged_options(spec)
    if "capacitance-mf" not in options:
        raise UsageError("no capacitance given: use --capacitance-mf")

    capacitances = parse_list(options["capacitance-mf"], float, "capacitance-mf")
    payloads = parse_list(options.get("payload-b", "5"), int, "payload-b")
    sfs = parse_list(options["sf"], int, "sf") if "sf" in options else [None]
    policies = scheduler_policies(options)
    sources = seeded_sources(trace_source(options), options)

    common = {
        "traffic": parse_scalar(options, "traffic", _enum(TrafficType, "traffic"), TrafficType.UNCONFIRMED),
        "ack_window": parse_scalar(options, "ack-window", _enum(AckWindow, "ack-window"), AckWindow.RX1),
        "generate_while_off": parse_scalar(options, "generate-while-off", _parse_bool, False),
    }
    optional = {
        "rx2_spreading_factor": parse_scalar(options, "rx2-sf", int),
        "horizon_s": parse_scalar(options, "horizon-s", float),
        "generation_interval_s": parse_scalar(options, "interval-s", float),
        "initial_voltage": parse_scalar(options, "initial-v", float),
    }
    common.update({key: value for key, value in optional.items() if value is not None})

    v_low = parse_scalar(options, "v-low", float)
    v_high = parse_scalar(options, "v-high", float)
    try:
        if v_low is not None or v_high is not None:
            defaults = Thresholds()
            common["thresholds"] = Thresholds(
                v_th_low=defaults.v_th_low if v_low is None else v_low,
                v_th_high=defaults.v_th_high if v_high is None else v_high,
            )

        scenarios = []
        grid = itertools.product(sources, capacitances, payloads, sfs, policies)
        for source, capacitance, payload, sf, policy in grid:
            fields = dict(
                common, trace=source, capacitance_f=capacitance * 1e-3, payload_bytes=payload, scheduler=policy
            )
            if sf is not None:
                fields["spreading_factor"] = sf
            scenario = ScenarioConfig(**fields)
            if scenario.payload_bytes > MAX_PAYLOAD_BYTES[scenario.spreading_factor]:
                raise UsageError(
                    f"payload of {payload} B exceeds the SF{scenario.spreading_factor} limit "
                    f"of {MAX_PAYLOAD_BYTES[scenario.spreading_factor]} B"
                )
            scenarios.append(scenario)
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        raise UsageError(f"invalid scenario option {location}: {error['msg']}")

    logger.debug(f"Resolved {len(scenarios)} scenario(s)")
    return scenarios
