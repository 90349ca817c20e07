"""Configuration management for the tensor laboratory."""
from pydantic_settings import BaseSettings
from typing import List


class Settings(BaseSettings):
    """Laboratory settings with environment variable support (prefix RIEMPROD_)."""

    # Seeding
    seed: int = 42

    # Tolerances (relative, scale clamped at 1)
    tolerance: float = 1e-9
    structure_tolerance: float = 1e-12
    algebra_tolerance: float = 1e-10

    # Suite grid defaults
    trials: int = 50
    default_n: List[int] = [3, 4]
    theta_scale: float = 1.0

    # Totally real planes
    plane_samples: int = 64
    plane_retries: int = 16

    # Negative controls
    control_attempts: int = 20
    control_threshold: float = 1e-3
    control_min_failures: int = 15

    # Runner
    max_workers: int = 4
    trial_timeout: float = 60.0

    log_level: str = "INFO"
    report_version: str = "1.0.0"

    class Config:
        env_prefix = "RIEMPROD_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False


settings = Settings()
