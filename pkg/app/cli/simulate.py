"""
`run` and `sweep` commands.
"""

import logging
from pathlib import Path
from typing import Dict, Optional

import typer

from app.cli.runspec import build_scenarios, check_trace_flags
from app.models.schemas import Command, MetricsReport, RunSpec
from app.services.metrics_service import write_event_log, write_report
from app.services.simulation_service import run_scenario, sweep
from app.utils.exceptions import UsageError

logger = logging.getLogger(__name__)


def collect_overrides(**flags) -> Dict[str, str]:
    """Flag values that were actually given, keyed by flag name."""
    overrides = {}
    for name, value in flags.items():
        if value is None or value is False:
            continue
        overrides[name.replace("_", "-")] = str(value).lower() if isinstance(value, bool) else str(value)
    return overrides


def _scenario_command(command: Command, summary: str):
    def handler(
        config: Optional[Path] = typer.Option(None, "--config", help="Flat key=value file; flags win"),
        trace: Optional[str] = typer.Option(None, "--trace", help="Harvest trace CSV (time_s,power_mW)"),
        constant_mw: Optional[float] = typer.Option(None, "--constant-mw", help="Constant harvest power"),
        synth: Optional[str] = typer.Option(None, "--synth", help="Synthetic trace: mean_mW,std_mW,tau_s,seed or PRESET,tau_s,seed (A-D)"),
        capacitance_mf: Optional[str] = typer.Option(None, "--capacitance-mf", help="Capacitance list in mF"),
        payload_b: Optional[str] = typer.Option(None, "--payload-b", help="Application payload list in bytes"),
        sf: Optional[str] = typer.Option(None, "--sf", help="Uplink spreading factor(s), 7..12"),
        scheduler: Optional[str] = typer.Option(None, "--scheduler", help="name[:params] list, e.g. us,fs:1.82,cs,as:5"),
        traffic: Optional[str] = typer.Option(None, "--traffic", help="confirmed | unconfirmed"),
        ack_window: Optional[str] = typer.Option(None, "--ack-window", help="Window for ACKs: rx1 | rx2 | none"),
        rx2_sf: Optional[int] = typer.Option(None, "--rx2-sf", help="RX2 spreading factor"),
        horizon_s: Optional[float] = typer.Option(None, "--horizon-s", help="Simulated time"),
        interval_s: Optional[float] = typer.Option(None, "--interval-s", help="Generation interval I"),
        v_low: Optional[float] = typer.Option(None, "--v-low", help="Switch-off threshold"),
        v_high: Optional[float] = typer.Option(None, "--v-high", help="Switch-on threshold"),
        initial_v: Optional[float] = typer.Option(None, "--initial-v", help="Capacitor voltage at t=0"),
        dt_s: Optional[float] = typer.Option(None, "--dt-s", help="Sample period of generated traces"),
        seed: Optional[str] = typer.Option(None, "--seed", help="Seed list for the --synth trace; replaces its seed"),
        generate_while_off: bool = typer.Option(False, "--generate-while-off", help="Keep generating while Off"),
        out: Optional[Path] = typer.Option(None, "--out", help="Results CSV"),
        events: Optional[Path] = typer.Option(None, "--events", help="Event log CSV (run only)"),
        series: Optional[Path] = typer.Option(None, "--series", help="Per-interval packet series CSV"),
        workers: Optional[int] = typer.Option(None, "--workers", help="Parallel workers (sweep only)"),
    ) -> RunSpec:
        overrides = collect_overrides(
            trace=trace, constant_mw=constant_mw, synth=synth, capacitance_mf=capacitance_mf,
            payload_b=payload_b, sf=sf, scheduler=scheduler, traffic=traffic, ack_window=ack_window,
            rx2_sf=rx2_sf, horizon_s=horizon_s, interval_s=interval_s, v_low=v_low, v_high=v_high,
            initial_v=initial_v, dt_s=dt_s, seed=seed, generate_while_off=generate_while_off,
        )
        check_trace_flags(overrides)
        if workers is not None and workers < 1:
            raise UsageError("--workers must be at least 1")
        return RunSpec(
            command=command, config_path=config, overrides=overrides,
            out=out, events=events, series=series, workers=workers,
        )

    handler.__doc__ = summary
    return handler


run_command = _scenario_command(Command.RUN, "Simulate one scenario.")
sweep_command = _scenario_command(Command.SWEEP, "Simulate the cartesian product of list-valued options.")


def _summary_line(report: MetricsReport) -> str:
    config = report.config
    mean = "-" if report.mean_inter_tx_s is None else f"{report.mean_inter_tx_s:.2f}s"
    return (
        f"{config['scheduler']:<10} C={config['capacitance_mf']:g}mF PL={config['payload_b']}B "
        f"SF{config['sf']} packets={report.packets_sent}/{report.p_max} "
        f"efficiency={report.efficiency_pct:.2f}% on={report.on_fraction:.3f} "
        f"off={report.off_fraction:.3f} charging={report.charging_fraction:.3f} mean_gap={mean}"
    )


def cmd_run(spec: RunSpec) -> int:
    scenarios = build_scenarios(spec)
    if len(scenarios) != 1:
        raise UsageError(f"run takes exactly one scenario, got {len(scenarios)}; use sweep")
    log, report = run_scenario(scenarios[0])

    typer.echo(_summary_line(report))
    if spec.out:
        write_report([report], spec.out, spec.series)
    if spec.events:
        write_event_log(log, spec.events)
    return 0


def cmd_sweep(spec: RunSpec) -> int:
    scenarios = build_scenarios(spec)
    results = sweep(scenarios, spec.workers)

    reports = []
    for result in results:
        if result.ok:
            reports.append(result.report)
            typer.echo(_summary_line(result.report))
        else:
            typer.echo(f"scenario {result.index} ({result.config.scheduler.label()}) failed: {result.error}", err=True)
    if spec.out:
        write_report(reports, spec.out, spec.series)
    return 0 if all(result.ok for result in results) else 1
