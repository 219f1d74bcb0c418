"""
`trace-gen` command: write a constant or synthetic harvest trace.
"""

from pathlib import Path
from typing import Optional

import typer

from app.cli.runspec import check_trace_flags, parse_scalar, parse_synth
from app.config.settings import settings
from app.models.schemas import Command, RunSpec
from app.services.trace_service import synth_constant, synth_stochastic, write_trace
from app.utils.exceptions import DomainError, UsageError


def trace_gen_command(
    constant_mw: Optional[float] = typer.Option(None, "--constant-mw", help="Constant harvest power"),
    synth: Optional[str] = typer.Option(None, "--synth", help="mean_mW,std_mW,tau_s,seed or PRESET,tau_s,seed (A-D)"),
    horizon_s: Optional[float] = typer.Option(None, "--horizon-s", help="Trace duration"),
    dt_s: Optional[float] = typer.Option(None, "--dt-s", help="Sample period"),
    out: Path = typer.Option(..., "--out", help="Output CSV"),
    header: bool = typer.Option(False, "--header", help="Write a time_s,power_mW header line"),
) -> RunSpec:
    """Generate a harvest trace file."""
    overrides = {}
    if constant_mw is not None:
        overrides["constant-mw"] = str(constant_mw)
    if synth is not None:
        overrides["synth"] = synth
    if horizon_s is not None:
        overrides["horizon-s"] = str(horizon_s)
    if dt_s is not None:
        overrides["dt-s"] = str(dt_s)
    if header:
        overrides["header"] = "true"
    check_trace_flags(overrides)
    if not any(key in overrides for key in ("constant-mw", "synth")):
        raise UsageError("trace-gen needs --constant-mw or --synth")
    return RunSpec(command=Command.TRACE_GEN, overrides=overrides, out=out)


def cmd_trace_gen(spec: RunSpec) -> int:
    options = spec.overrides
    horizon = parse_scalar(options, "horizon-s", float, settings.HORIZON_S)
    dt = parse_scalar(options, "dt-s", float, settings.TRACE_DT_S)
    try:
        if "constant-mw" in options:
            trace = synth_constant(parse_scalar(options, "constant-mw", float) * 1e-3, horizon, dt)
        else:
            mean, std, tau, seed = parse_synth(options["synth"])
            trace = synth_stochastic(mean * 1e-3, std * 1e-3, tau, horizon, dt, seed)
    except DomainError as e:
        raise UsageError(e.message)

    write_trace(trace, spec.out, header=options.get("header") == "true")
    typer.echo(f"wrote {len(trace)} samples to {spec.out}")
    return 0
