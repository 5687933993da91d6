"""
`verify` command: ratio suites and lemma checks; nonzero exit iff any fails.
"""

from functools import partial
from pathlib import Path
from typing import Optional

import typer

from handlers.common import execute
from handlers.options import ConfigOption, OutOption, SeedOption, WorkersOption
from models.verification_experiment import VerificationExperiment
from services.verify import SUITE_NAMES


def verify_command(
    suite: str = typer.Option("all", "--suite", help=f"Comma-separated suites: all, {', '.join(SUITE_NAMES)}"),
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    workers: Optional[int] = WorkersOption,
    seed: Optional[int] = SeedOption,
) -> None:
    """Run the selected verification suites; write verify.json."""
    factory = partial(VerificationExperiment, selector=suite, workers=workers)
    code = execute("verify", factory, config, out, workers, seed)
    raise typer.Exit(code=code)
