import logging
from pathlib import Path
from typing import Any, Optional

from pydantic import Field, ValidationError, computed_field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Logging Configuration
    LOG_LEVEL: str = Field(default="INFO")
    LOG_DIR: str = Field(default="logs")
    LOG_JSON: bool = Field(default=False, description="Add the JSON console handler")
    LOG_TO_FILE: bool = Field(default=True, description="Enable rotating file handlers")

    # Compute Configuration
    ETHLAB_THREADS: Optional[int] = Field(
        default=None,
        description="Worker pool size used when --threads is not given")

    # Spectrum Cache Configuration
    CACHE_ENABLED: bool = Field(default=True)
    CACHE_DIR: str = Field(default=".ethlab_cache")
    CACHE_MEMORY_ENTRIES: int = Field(
        default=2,
        description="Spectra kept in process memory; each holds a dense eigenvector matrix")

    # Sentry Configuration
    SENTRY_DSN: Optional[str] = Field(default=None)
    SENTRY_ENABLED: bool = Field(default=False)
    SENTRY_ENVIRONMENT: str = Field(default="research")
    SENTRY_TRACES_SAMPLE_RATE: float = Field(default=0.0)

    # Prometheus Configuration
    PROMETHEUS_ENABLED: bool = Field(default=True)
    PROMETHEUS_TEXTFILE: Optional[str] = Field(
        default=None,
        description="Write run metrics in Prometheus text format to this path")

    @computed_field
    @property
    def cache_path(self) -> Path:
        return Path(self.CACHE_DIR)

    @computed_field
    @property
    def DATABASE_URL(self) -> str:
        return f"sqlite:///{self.cache_path / 'spectra.db'}"

    @field_validator('LOG_LEVEL', mode='before')
    @classmethod
    def validate_log_level(cls, v: Any):
        level = str(v).strip().upper()
        if level not in getattr(logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel))():
            raise ValueError(f"Unknown log level {v!r}")
        return level

    @field_validator('ETHLAB_THREADS', 'SENTRY_DSN', 'PROMETHEUS_TEXTFILE', mode='before')
    @classmethod
    def empty_string_to_none(cls, v: Any):
        """Convert empty strings to None for optional fields"""
        if isinstance(v, str) and v.strip() == '':
            return None
        return v

    @field_validator('ETHLAB_THREADS')
    @classmethod
    def validate_threads(cls, v: Optional[int]):
        if v is not None and v < 1:
            raise ValueError("ETHLAB_THREADS must be a positive integer")
        return v

    model_config = SettingsConfigDict(env_file='.env',
                                      env_file_encoding='utf-8',
                                      extra='ignore',
                                      populate_by_name=True)


_settings_instance: Optional[Settings] = None


def get_settings() -> Settings:
    global _settings_instance
    if _settings_instance is None:
        try:
            _settings_instance = Settings()
            if _settings_instance.SENTRY_ENABLED and not _settings_instance.SENTRY_DSN:
                logging.warning(
                    "WARNING: SENTRY_ENABLED is set but SENTRY_DSN is empty. Error reporting is disabled.")
        except ValidationError as e:
            logging.critical(
                f"Pydantic validation error while loading settings: {e}")

            raise SystemExit(
                f"CRITICAL SETTINGS ERROR: {e}. Please check your .env file and Settings model."
            )
    return _settings_instance


def reset_settings() -> None:
    """Сбрасывает кэшированный экземпляр (для тестов и повторной загрузки .env)."""
    global _settings_instance
    _settings_instance = None
