from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

GENERATOR_COUNT_ENV = "GRADED_ALGEBRA_DEFAULT_GENERATOR_COUNT"


class Environment(str, Enum):
    DEVELOPMENT = "development"
    PRODUCTION = "production"
    TEST = "test"


class AlgebraSettings(BaseSettings):
    """Grassmann algebra configuration."""

    model_config = SettingsConfigDict(env_prefix="GRADED_ALGEBRA_", env_file=".env", extra="ignore")

    default_generator_count: int = Field(default=16, ge=1, le=127, description="Generators v1..vG per run")


class HarnessSettings(BaseSettings):
    """Randomized verification harness configuration."""

    model_config = SettingsConfigDict(env_prefix="GRADED_HARNESS_", env_file=".env", extra="ignore")

    default_degree: int = Field(default=3, ge=1, description="Max blade degree per entry term")
    default_terms: int = Field(default=2, ge=1, description="Terms per matrix entry")
    default_trials: int = Field(default=25, ge=1, description="Trials per verify run")
    default_seed: int = Field(default=0, ge=0, description="Seed when none is given")
    non_vacuity_threshold: float = Field(
        default=0.8, ge=0.0, le=1.0, description="Fraction of trials expected to be non-vacuous"
    )
    coefficient_numerator_bound: int = Field(default=9, ge=1, description="Numerators in -b..b, nonzero")
    coefficient_denominator_max: int = Field(default=4, ge=1, description="Denominators in 1..m")
    worker_concurrency: int = Field(default=1, ge=1, description="Worker processes for trials")


class Settings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_prefix="GRADED_", env_file=".env", env_file_encoding="utf-8", case_sensitive=False, extra="ignore"
    )

    environment: Environment = Field(default=Environment.DEVELOPMENT, description="Environment")
    log_level: str = Field(default="WARNING", description="Minimum log level")
    logging_config_path: Optional[Path] = Field(default=None, description="dictConfig YAML file")

    algebra: AlgebraSettings = Field(default_factory=AlgebraSettings)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)


@lru_cache()
def get_settings() -> Settings:
    """Get application settings with caching."""
    return Settings()
