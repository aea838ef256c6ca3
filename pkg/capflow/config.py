import logging
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class AppSettings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="CAPFLOW_")

    env: str = "DEV"
    log_level: str = "INFO"
    max_points: int = Field(100_000, gt=0)
    max_grid_points: int = Field(1_000_000, gt=0)
    partition_count: int = Field(4, gt=0)


@lru_cache()
def get_app_settings():
    return AppSettings()


app_settings = get_app_settings()

logging.basicConfig(level=app_settings.log_level)
logger = logging.getLogger("capflow")
