"""
`kolmogorov` command: exact fractional Kolmogorov run and radius fits.
"""

from pathlib import Path
from typing import Optional

import typer

from handlers.common import execute
from handlers.options import ConfigOption, OutOption, SeedOption, WorkersOption
from models.kolmogorov_experiment import KolmogorovExperiment


def kolmogorov_command(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    workers: Optional[int] = WorkersOption,
    seed: Optional[int] = SeedOption,
) -> None:
    """Solve the fractional Kolmogorov equation exactly; write norms.csv and fits.json."""
    code = execute("kolmogorov", KolmogorovExperiment, config, out, workers, seed)
    raise typer.Exit(code=code)
