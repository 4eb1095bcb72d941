"""
Centralized settings management using pydantic.

Loads configuration from:
1. Environment variables (prefix CIRCLE_LAB_)
2. .env file
3. Default values
"""

import os
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from circle_lab.version import __version__


class Settings(BaseSettings):
    """Laboratory settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_prefix="CIRCLE_LAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application Info
    app_name: str = Field(default="circle-lab")
    app_version: str = Field(default=__version__)
    debug: bool = Field(default=False)
    environment: str = Field(default="development")

    # Budgets
    budget: int = Field(default=2**27, ge=1, description="Max grid points per torus grid")
    operation_budget: int = Field(default=10**9, ge=1)
    threads: Optional[int] = Field(default=None, ge=1)

    # Numerics
    pairwise_chunk: int = Field(default=1024, ge=2)
    quadrature_tol: float = Field(default=1e-9, gt=0)
    quadrature_max_depth: int = Field(default=30, ge=1)
    quadrature_nodes: int = Field(default=16, ge=4)
    quad_limit: int = Field(default=500, ge=50)
    rho_fourier_exponent: int = Field(default=6, ge=1)
    poisson_q_ratio: float = Field(default=1.0, gt=0)
    poisson_beta_constant: float = Field(default=1.0, gt=0)
    majorant_eps: float = Field(default=1e-3, gt=0)
    mollifier_c1: float = Field(default=0.125, gt=0, le=1)
    level_set_oversample: int = Field(default=8, ge=1)

    # Output
    output_dir: Path = Field(default=Path("results"))

    # Logging Configuration
    log_level: str = Field(default="INFO")
    log_json_format: bool = Field(default=False)
    log_to_file: bool = Field(default=False)
    log_file_path: str = Field(default="logs/circle-lab.log")
    log_max_bytes: int = Field(default=10485760)  # 10MB
    log_backup_count: int = Field(default=5)

    # Feature Flags
    enable_sentry: bool = Field(default=False)
    enable_performance_tracking: bool = Field(default=True)

    @property
    def is_development(self) -> bool:
        """Check if running in development environment."""
        return self.environment.lower() in ("development", "dev", "local")

    def ensure_directories(self):
        """Ensure log directory exists when file logging is on."""
        if self.log_to_file:
            Path(self.log_file_path).parent.mkdir(parents=True, exist_ok=True)

    def ensure_output_dir(self, output_dir: Optional[Path] = None) -> Path:
        """Create and return the directory reports are written to."""
        target = Path(output_dir or self.output_dir)
        target.mkdir(parents=True, exist_ok=True)
        return target

    def get_sentry_config(self) -> Optional[dict]:
        """Get Sentry init kwargs, or None when disabled or unconfigured."""
        dsn = os.getenv("SENTRY_DSN")
        if not self.enable_sentry or not dsn:
            return None
        return {
            "dsn": dsn,
            "environment": self.environment,
            "release": self.app_version,
        }


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get the global settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
        _settings.ensure_directories()
    return _settings


def reload_settings() -> Settings:
    """Reload settings from environment/file and rebind the module global."""
    global _settings, settings
    _settings = None
    settings = get_settings()
    return settings


# Create global settings instance for direct import
settings = get_settings()
