from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings read from the environment and `.env`."""

    threads: int = Field(default=1, ge=1, alias="ASYMPRUNE_THREADS", description="Worker parallelism cap for grid variants")
    log_level: str = Field(default="INFO", alias="ASYMPRUNE_LOG_LEVEL")
    log_file: str = Field(default="logs/asymprune.log", alias="ASYMPRUNE_LOG_FILE", description="Empty disables file logging")
    runs_dir: str = Field(default="runs", alias="ASYMPRUNE_RUNS_DIR")
    progress: bool = Field(default=True, alias="ASYMPRUNE_PROGRESS", description="Show tqdm bars during training and grids")
    check_finite: bool = Field(default=True, alias="ASYMPRUNE_CHECK_FINITE", description="Reject NaN/Inf after every tensor op")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=True,
        populate_by_name=True,
    )


settings = Settings()
