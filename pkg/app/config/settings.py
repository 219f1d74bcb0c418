"""
Configuration management for the energy-harvesting LoRaWAN simulator
Handles environment variables and simulation defaults
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field, validator
from typing import Dict, Optional


class Settings(BaseSettings):
    """Application settings with validation and type checking."""

    model_config = SettingsConfigDict(
        env_prefix="EHSIM_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "ehsim"

    # Energy model
    SOURCE_VOLTAGE_E: float = Field(default=3.3, description="Harvester Thevenin source voltage (V)")
    MIN_POWER_FLOOR_W: float = Field(default=1e-9, description="Harvest power at or below which the harvester is absent (W)")
    V_TH_LOW: float = Field(default=1.8, description="Switch-off threshold (V)")
    V_TH_HIGH: float = Field(default=3.0, description="Switch-on threshold (V)")
    INITIAL_VOLTAGE: float = Field(default=0.0, description="Capacitor voltage at t=0 (V)")

    # Load resistances, derived from SX127x-class currents at 3.3 V
    R_OFF_OHM: float = Field(default=1e9, description="Off/Charging leakage resistance")
    R_SLEEP_OHM: float = Field(default=1.65e6, description="Sleep (~2 uA)")
    R_IDLE_OHM: float = Field(default=8.3e3, description="Idle between TX and RX windows (~0.4 mA)")
    R_RX_OHM: float = Field(default=300.0, description="Receive (~11 mA)")
    R_WAKEUP_OHM: float = Field(default=660.0, description="Boot after power-up (~5 mA)")
    TX_RESISTANCE_OHM: Dict[int, float] = Field(
        default={14: 75.0, 11: 115.0, 8: 140.0, 2: 165.0},
        description="Transmit resistance per output power level (dBm)"
    )
    TX_POWER_DBM: int = Field(default=14, description="Transmit power level")
    WAKEUP_DURATION_S: float = Field(default=0.01, description="WakeUp state duration (s)")

    # Traffic and MAC
    HORIZON_S: float = Field(default=32400.0, description="Simulated horizon (s)")
    GENERATION_INTERVAL_S: float = Field(default=4.0, description="Application generation interval I (s)")
    SPREADING_FACTOR: int = Field(default=7, description="Uplink spreading factor")
    RX2_SPREADING_FACTOR: int = Field(default=12, description="RX2 spreading factor")
    RX_WINDOW_SYMBOLS: int = Field(default=5, description="Preamble symbols the receiver waits in an empty window")
    UPLINK_DUTY_CYCLE: float = Field(default=0.01, description="Aggregate uplink duty cycle")
    DOWNLINK_DUTY_CYCLE: float = Field(default=0.1, description="RX2 sub-band duty cycle")

    # Schedulers
    RECHECK_INTERVAL_S: float = Field(default=0.1, description="Upper bound between re-evaluations of a deferred packet")
    OS_GRID_S: float = Field(default=0.1, description="Optimal scheduler decision grid")
    FS_V_TH: float = Field(default=1.82, description="Fixed-threshold scheduler voltage")
    AS_WINDOW_S: float = Field(default=5.0, description="Moving-average window x")
    MINS_WINDOW_S: float = Field(default=5.0, description="Minimum-harvest window x")
    AVES_GAIN: float = Field(default=0.1, description="AVES smoothing gain g")

    # Traces and reports
    TRACE_DT_S: float = Field(default=1.0, description="Sample period for generated traces")
    REPORT_BUCKET_S: float = Field(default=120.0, description="Width of per-interval packet buckets")
    SWEEP_WORKERS: int = Field(default=1, description="Parallel workers for sweeps (joblib n_jobs)")

    # Logging
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")
    LOG_FORMAT: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log format"
    )
    LOG_FILE: Optional[str] = Field(default=None, description="Log file path")
    LOG_JSON: bool = Field(default=False, description="Emit JSON log records")

    @validator("LOG_LEVEL")
    def validate_log_level(cls, v):
        allowed = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed:
            raise ValueError(f"Log level must be one of: {allowed}")
        return v.upper()

    @validator("V_TH_HIGH")
    def validate_thresholds(cls, v, values):
        low = values.get("V_TH_LOW")
        if low is not None and v <= low:
            raise ValueError("V_TH_HIGH must exceed V_TH_LOW")
        return v


# Create global settings instance
settings = Settings()
