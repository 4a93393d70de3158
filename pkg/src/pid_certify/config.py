"""Configuration management using pydantic-settings"""

from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Run defaults with environment variable support"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Logging / execution
    LOG_LEVEL: str = "INFO"
    JOBS: int = 1

    # Path settings
    # __file__ = src/pid_certify/config.py -> parent.parent.parent = project root
    BASE_DIR: Path = Path(__file__).resolve().parent.parent.parent
    OUTPUT_DIR: Path = BASE_DIR / "output"

    # Numerics
    QUAD_ORDER: int = 16
    QUAD_RTOL: float = 1e-9
    MEMBERSHIP_TOL: float = 1e-6
    HESSIAN_TOL: float = 1e-5

    # Sampling
    CERTIFY_SAMPLES: int = 1000
    SAMPLE_RADIUS: float = 5.0

    # Artifacts
    FLOAT_DIGITS: int = 17


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
