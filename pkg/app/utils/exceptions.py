# app/utils/exceptions.py
"""
Custom exceptions for the energy-harvesting LoRaWAN simulator
"""

from typing import Optional, Any, Dict


class SimulatorException(Exception):
    """Base exception for the simulator."""

    error_code = "SIMULATOR_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class DomainError(SimulatorException):
    """Raised when a value lies outside an operation's domain."""

    error_code = "DOMAIN_ERROR"


class ConfigurationError(SimulatorException):
    """Raised when a scenario or settings configuration is invalid."""

    error_code = "CONFIGURATION_ERROR"


class TraceFormatError(SimulatorException):
    """Raised when a harvest trace file cannot be parsed."""

    error_code = "TRACE_FORMAT_ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.line = self.details.get("line")


class SimulationLogicError(SimulatorException):
    """Raised on an illegal state transition or duty-cycle violation inside the engine."""

    error_code = "SIMULATION_LOGIC_ERROR"


class ReportError(SimulatorException):
    """Raised when results cannot be written."""

    error_code = "REPORT_ERROR"


class UsageError(SimulatorException):
    """Raised on command-line misuse."""

    error_code = "USAGE_ERROR"
    exit_code = 2
