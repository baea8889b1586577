"""
Base configuration for all simulator components.

Uses Pydantic Settings for environment-based configuration.
Each component extends BaseSimSettings with its own prefix.
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class BaseSimSettings(BaseSettings):
    """Base settings shared by all simulator components."""

    component_name: str = "base"

    # Logging
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )
