"""Configuration management for the balanced-obstruction engine."""
import os
from typing import List, Tuple
from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables
load_dotenv()


def _float_list(raw: str) -> List[float]:
    return [float(part) for part in raw.split(",") if part.strip()]


class LoggingConfig(BaseModel):
    """Logging configuration."""
    level: str = Field(default_factory=lambda: os.getenv("BALOBS_LOG_LEVEL", "WARNING"))
    log_file: str = Field(default_factory=lambda: os.getenv("BALOBS_LOG_FILE", ""))


class NumericConfig(BaseModel):
    """Tolerances and defaults for the numeric layer."""
    harmonic_tol: float = Field(default_factory=lambda: float(os.getenv("BALOBS_HARMONIC_TOL", "1e-10")))
    verdict_tol: float = Field(default_factory=lambda: float(os.getenv("BALOBS_VERDICT_TOL", "1e-9")))
    adjoint_tol: float = Field(default_factory=lambda: float(os.getenv("BALOBS_ADJOINT_TOL", "1e-9")))
    hermitian_tol: float = 1e-12
    fd_steps: List[float] = Field(default_factory=lambda: _float_list(os.getenv("BALOBS_FD_STEPS", "1e-2,5e-3,2.5e-3")))
    fd_order_window: Tuple[float, float] = Field(default_factory=lambda: (
        float(os.getenv("BALOBS_FD_ORDER_MIN", "1.7")),
        float(os.getenv("BALOBS_FD_ORDER_MAX", "2.3")),
    ))
    fd_agree_factor: float = Field(default_factory=lambda: float(os.getenv("BALOBS_FD_AGREE_FACTOR", "1e-3")))
    fd_noise_floor: float = Field(default_factory=lambda: float(os.getenv("BALOBS_FD_NOISE_FLOOR", "1e-12")))
    singular_cond: float = Field(default_factory=lambda: float(os.getenv("BALOBS_SINGULAR_COND", "1e12")))


class EngineConfig(BaseModel):
    """Symbolic engine behaviour."""
    default_convention: str = Field(default_factory=lambda: os.getenv("BALOBS_CONVENTION", "hermitian-standard"))
    registry_dir: str = Field(default_factory=lambda: os.getenv(
        "BALOBS_REGISTRY_DIR",
        os.path.join(os.path.dirname(os.path.abspath(__file__)), "models", "registry"),
    ))
    parallel_sectors: bool = Field(default_factory=lambda: os.getenv("BALOBS_PARALLEL_SECTORS", "true").lower() == "true")


class Config(BaseModel):
    """Main configuration class."""
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    numeric: NumericConfig = Field(default_factory=NumericConfig)
    engine: EngineConfig = Field(default_factory=EngineConfig)


# Global configuration instance
config = Config()
