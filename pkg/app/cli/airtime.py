"""
`airtime` command: time on air and minimum transmission interval.
"""

from typing import Optional

import typer

from app.cli.runspec import parse_list
from app.models.lorawan import RadioParams
from app.models.schemas import Command, RunSpec
from app.services.lorawan_mac import (
    REFERENCE_AIRTIMES_MS,
    max_payload,
    min_tx_interval,
    time_on_air,
)
from app.utils.exceptions import UsageError

# Allowed relative deviation from the published figures
TABLE_TOLERANCE = 0.005


def airtime_command(
    sf: Optional[str] = typer.Option(None, "--sf", help="Spreading factor list (default 7,8)"),
    payload_b: Optional[str] = typer.Option(None, "--payload-b", help="Payload list in bytes (default 0,5,50,100)"),
    duty_cycle: float = typer.Option(0.01, "--duty-cycle", help="Duty cycle for the minimum interval"),
    check_table1: bool = typer.Option(False, "--check-table1", help="Compare with the published airtime table"),
) -> RunSpec:
    """Print LoRa time on air and the duty-cycle minimum interval."""
    overrides = {"duty-cycle": str(duty_cycle)}
    if sf is not None:
        overrides["sf"] = sf
    if payload_b is not None:
        overrides["payload-b"] = payload_b
    return RunSpec(command=Command.AIRTIME, overrides=overrides, check_table1=check_table1)


def cmd_airtime(spec: RunSpec) -> int:
    sfs = parse_list(spec.overrides.get("sf", "7,8"), int, "sf")
    payloads = parse_list(spec.overrides.get("payload-b", "0,5,50,100"), int, "payload-b")
    duty_cycle = float(spec.overrides.get("duty-cycle", "0.01"))
    if not 0 < duty_cycle <= 1:
        raise UsageError(f"duty cycle must be in (0, 1]: {duty_cycle}")

    mismatches = 0
    for sf in sfs:
        if sf < 7 or sf > 12:
            raise UsageError(f"spreading factor must be 7..12, got {sf}")
        for payload in payloads:
            if payload < 0 or payload > max_payload(sf):
                raise UsageError(f"payload of {payload} B exceeds the SF{sf} limit of {max_payload(sf)} B")
            toa = time_on_air(RadioParams(spreading_factor=sf), payload)
            line = f"SF{sf} PL={payload}B ToA={toa * 1e3:.2f} ms min_interval={min_tx_interval(toa, duty_cycle):.2f} s"

            reference = REFERENCE_AIRTIMES_MS.get((sf, payload))
            if spec.check_table1 and reference is not None:
                ok = abs(toa * 1e3 - reference) <= TABLE_TOLERANCE * reference
                mismatches += 0 if ok else 1
                line += f" reference={reference:.2f} ms {'ok' if ok else 'MISMATCH'}"
            typer.echo(line)

    return 1 if mismatches else 0
