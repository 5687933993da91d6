"""
`simulate` command: Picard or direct Kac run with energy audits.
"""

from pathlib import Path
from typing import Optional

import typer

from handlers.common import execute
from handlers.options import ConfigOption, OutOption, SeedOption, WorkersOption
from models.simulation_experiment import SimulationExperiment


def simulate_command(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    workers: Optional[int] = WorkersOption,
    seed: Optional[int] = SeedOption,
) -> None:
    """Run the Kac perturbation solver; write norms.csv, audit.json and snapshots."""
    code = execute("simulate", SimulationExperiment, config, out, workers, seed)
    raise typer.Exit(code=code)
