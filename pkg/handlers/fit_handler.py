"""
`fit` command: smoothing-radius fits from stored snapshots.
"""

from functools import partial
from pathlib import Path
from typing import Optional

import typer

from handlers.common import execute
from handlers.options import ConfigOption, OutOption, SeedOption, WorkersOption
from models.fit_experiment import FitExperiment


def fit_command(
    snapshots: Path = typer.Option(..., "--snapshots", help="Directory of KACFIELD-v1 snapshots"),
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    workers: Optional[int] = WorkersOption,
    seed: Optional[int] = SeedOption,
) -> None:
    """Fit x, v and velocity-decay radii; write fits.json."""
    factory = partial(FitExperiment, snapshot_dir=snapshots, workers=workers)
    code = execute("fit", factory, config, out, workers, seed)
    raise typer.Exit(code=code)
