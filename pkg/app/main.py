"""
Command-line entry point for the energy-harvesting LoRaWAN simulator
"""

import logging
import sys
from typing import Callable, Dict, List, Optional

import click
import typer

from app.cli.airtime import airtime_command, cmd_airtime
from app.cli.simulate import cmd_run, cmd_sweep, run_command, sweep_command
from app.cli.traces import cmd_trace_gen, trace_gen_command
from app.config.settings import settings
from app.models.schemas import Command, RunSpec
from app.utils.exceptions import SimulatorException, UsageError
from app.utils.logging_config import setup_logging

logger = logging.getLogger(__name__)

cli = typer.Typer(
    name=settings.APP_NAME,
    help="Battery-less LoRaWAN Class A end device simulator",
    add_completion=False,
    no_args_is_help=True,
)
cli.command("run")(run_command)
cli.command("sweep")(sweep_command)
cli.command("airtime")(airtime_command)
cli.command("trace-gen")(trace_gen_command)

EXECUTORS: Dict[Command, Callable[[RunSpec], int]] = {
    Command.RUN: cmd_run,
    Command.SWEEP: cmd_sweep,
    Command.AIRTIME: cmd_airtime,
    Command.TRACE_GEN: cmd_trace_gen,
}


def parse_args(argv: List[str]):
    """
    Parse argv into a RunSpec.

    Returns the click exit code instead when the arguments only asked for help.
    """
    command = typer.main.get_command(cli)
    try:
        result = command.main(args=list(argv), prog_name=settings.APP_NAME, standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.UsageError as e:
        raise UsageError(e.format_message())
    except click.ClickException as e:
        raise UsageError(e.format_message())

    if isinstance(result, (RunSpec, int)):
        return result
    raise UsageError("no command given")


def main(argv: Optional[List[str]] = None) -> int:
    setup_logging()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        command = typer.main.get_command(cli)
        typer.echo(command.get_help(click.Context(command, info_name=settings.APP_NAME)), err=True)
        return 2

    try:
        spec = parse_args(argv)
        if isinstance(spec, int):
            return spec
        logger.debug(f"Executing {spec.command.value}")
        return EXECUTORS[spec.command](spec)
    except UsageError as e:
        typer.echo(f"error: {e.message}", err=True)
        return e.exit_code
    except SimulatorException as e:
        logger.error(f"{e.error_code}: {e.message}")
        typer.echo(f"error: {e.message}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
