"""
Shared plumbing of the command handlers: option resolution, error-to-exit-code
mapping and the end-of-run summary table.
"""

from pathlib import Path
from typing import Callable, Optional

import logfire
from rich.console import Console
from rich.table import Table

from config.run_config import load_run_config
from config.settings import settings
from models.experiment import Experiment
from schemas.report_schema import ExperimentSummary
from services.errors import ConfigError, KacError, PicardNonConvergence, SuiteError

# ================================================
# Exit codes
# ================================================
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PICARD = 4

console = Console()


def exit_code_for(error: KacError) -> int:
    if isinstance(error, (ConfigError, SuiteError)):
        return EXIT_CONFIG
    if isinstance(error, PicardNonConvergence):
        return EXIT_PICARD
    return EXIT_NUMERICAL


def resolve_out_dir(command: str, out: Optional[Path]) -> Path:
    """--out, then OUTPUT_DIR, then runs/<command>."""
    if out is not None:
        return Path(out)
    if settings.OUTPUT_DIR:
        return Path(settings.OUTPUT_DIR) / command
    return Path("runs") / command


def render_summary(summary: ExperimentSummary) -> None:
    table = Table(title=f"{summary.command} summary")
    table.add_column("check")
    table.add_column("value", justify="right")
    table.add_column("status")
    styles = {"pass": "green", "fail": "bold red", "info": "dim"}
    for row in summary.rows:
        table.add_row(row.name, row.value, f"[{styles[row.status]}]{row.status}[/]")
    console.print(table)


def execute(
    command: str,
    factory: Callable[..., Experiment],
    config_path: Optional[Path],
    out: Optional[Path],
    workers: Optional[int],
    seed: Optional[int],
) -> int:
    """
    Load the config, build the experiment, run it and return the exit code.

    Config errors are raised before anything is written to the output directory.
    """
    try:
        if workers is not None:
            settings.WORKERS = workers
        config = load_run_config(config_path).with_seed(seed)
        inputs = [Path(config_path)] if config_path is not None else []
        experiment = factory(config, resolve_out_dir(command, out), inputs=inputs)
        logfire.info(f"{command}: starting with seed {config.seed}")
        summary = experiment.run()
    except KacError as e:
        code = exit_code_for(e)
        logfire.error(f"{command} failed with exit code {code}: {e}")
        console.print(f"[bold red]{command} failed:[/] {e}")
        return code
    render_summary(summary)
    return EXIT_CHECK_FAILED if summary.failed else EXIT_OK
