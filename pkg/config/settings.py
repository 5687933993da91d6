"""
Application settings and configuration.
"""
# ================================================
# Application Settings
# ================================================
from pydantic_settings import BaseSettings
from pydantic import ConfigDict, Field
from typing import Optional


# ================================================
# Settings Class
# ================================================
class Settings(BaseSettings):
    """Process-wide settings read from the environment and `.env`."""

    model_config = ConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"  # Ignore extra fields not defined in the model
    )

    # Output directory override; the only setting that affects run artifacts
    OUTPUT_DIR: Optional[str] = None

    # Default worker count for corpus-parallel suites
    WORKERS: int = Field(default=4, ge=1)

    # Logfire
    LOGFIRE_TOKEN: Optional[str] = None
    LOG_CONSOLE: bool = True

    APP_VERSION: str = "0.1.0"


# ================================================
# Settings Instance
# ================================================
settings = Settings()
