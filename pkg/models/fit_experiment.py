"""
Smoothing-radius fits from a directory of stored snapshots.
"""

from pathlib import Path
from typing import Optional, Sequence

import logfire

from models.experiment import Experiment
from schemas.config_schema import RunConfig
from schemas.report_schema import ExperimentSummary, SummaryRow
from services.errors import FitError
from services.grid import forward
from services.norms import fit_gevrey_radius
from storage.snapshot import read_snapshot_dir
from storage.writers import write_json

DIRECTIONS = ("x", "v", "velocity-decay")


class FitExperiment(Experiment):
    """
    Fits all three directions and writes fits.json.

    A direction without enough usable modes is recorded with its error message;
    the run fails only when no direction can be fitted.
    """

    command = "fit"

    def __init__(
        self,
        config: RunConfig,
        out_dir: Path,
        snapshot_dir: Path,
        workers: Optional[int] = None,
        inputs: Sequence[Path] = (),
    ) -> None:
        self.snapshot_dir: Path = Path(snapshot_dir)
        self.snapshots = read_snapshot_dir(self.snapshot_dir)
        super().__init__(config, out_dir, workers, [*inputs, *sorted(self.snapshot_dir.glob("*.kacf"))])

    def execute(self) -> ExperimentSummary:
        times = [t for t, _ in self.snapshots]
        spectral = [forward(field) for _, field in self.snapshots]
        s_tilde = self.config.psi().params.s_tilde
        fits: dict[str, object] = {}
        rows = []
        errors: list[str] = []
        for direction in DIRECTIONS:
            try:
                report = fit_gevrey_radius(times, spectral, direction, s_tilde)
            except FitError as e:
                logfire.warning(f"fit {direction} skipped: {e}")
                fits[direction] = {"direction": direction, "error": str(e)}
                errors.append(str(e))
                rows.append(SummaryRow(name=f"fit {direction}", value="not enough usable modes", status="fail"))
                continue
            fits[direction] = report
            rows.append(
                SummaryRow(
                    name=f"fit {direction}",
                    value=f"exponent {report.exponent_estimate:.4f}, r2 {report.r2:.4f}",
                    status="pass",
                )
            )
        if len(errors) == len(DIRECTIONS):
            raise FitError("no direction could be fitted: " + "; ".join(errors))
        output = write_json(self.path("fits.json"), fits)
        return ExperimentSummary(command=self.command, rows=rows, outputs=[str(output)])
