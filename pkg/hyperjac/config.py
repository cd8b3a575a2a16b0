"""Settings for hyperjac, read from the environment and the nearest .env file."""

from functools import lru_cache
from pathlib import Path

from dotenv import find_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# Missing .env is fine, unlike the research scripts this layer replaced
DOTENV_PATH = find_dotenv(usecwd=True) or None


class Settings(BaseSettings):
    """Process-wide knobs. Environment variables use the ``HYPERJAC_`` prefix."""

    model_config = SettingsConfigDict(
        env_prefix="HYPERJAC_",
        env_file=DOTENV_PATH,
        env_file_encoding="utf-8",
        extra="ignore",
    )

    budget: int = Field(10_000_000, ge=1)
    workers: int = Field(1, ge=1)
    seed: int = 42
    quad_nodes: int = Field(8, ge=2)
    quad_panels: int = Field(8, ge=1)
    min_nodes_per_wavelength: int = Field(8, ge=2)
    pair_grid: int = Field(48, ge=4)
    log_level: str = "INFO"
    report_dir: Path = Path("reports")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
