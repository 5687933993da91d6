"""
Run manifest schema.
"""

from datetime import datetime
from typing import Any, Optional

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """Written before a run starts and finalized after it ends."""

    command: str  # kolmogorov | simulate | verify | fit
    version: str
    config: dict[str, Any]
    seeds: dict[str, int] = Field(default_factory=dict)
    workers: int
    started_at: datetime
    finished_at: Optional[datetime] = None
    exit_code: Optional[int] = None
    inputs: dict[str, str] = Field(default_factory=dict)  # path -> sha256
    outputs: dict[str, str] = Field(default_factory=dict)  # path relative to the run directory -> sha256
