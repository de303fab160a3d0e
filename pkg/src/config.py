import os
from functools import lru_cache
from pathlib import Path
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="FIPS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # App
    app_name: str = "fips-periodic-control"
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    log_file: Optional[Path] = None

    # Parallelism (FIPS_THREADS); None means one worker per core
    threads: Optional[int] = Field(default=None, ge=1)

    # Output
    csv_significant_digits: int = Field(default=17, ge=1, le=17)

    # Weights & Biases
    wandb_api_key: str = ""
    wandb_project: str = "fips-periodic-control"
    wandb_enabled: bool = False

    @property
    def effective_threads(self) -> int:
        return self.threads or os.cpu_count() or 1


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
