"""
Empirical-constant suites and lemma checks selected by name.
"""

from pathlib import Path
from typing import Optional, Sequence

from models.experiment import Experiment
from schemas.config_schema import RunConfig
from schemas.report_schema import ExperimentSummary, RatioSuite, SummaryRow
from services.verify import resolve_selector, run_suites
from storage.writers import write_json


class VerificationExperiment(Experiment):
    """Writes verify.json with one report per suite or lemma check."""

    command = "verify"

    def __init__(
        self,
        config: RunConfig,
        out_dir: Path,
        selector: str = "all",
        workers: Optional[int] = None,
        inputs: Sequence[Path] = (),
    ) -> None:
        # Unknown names fail before the output directory is created
        self.suites: list[str] = resolve_selector(selector)
        super().__init__(config, out_dir, workers, inputs)

    def execute(self) -> ExperimentSummary:
        cfg = self.config.verify_config(self.workers)
        results = run_suites(self.suites, cfg)
        output = write_json(self.path("verify.json"), {"suites": self.suites, "results": results})
        rows = []
        for result in results:
            name = result.name if isinstance(result, RatioSuite) else result.lemma
            rows.append(
                SummaryRow(
                    name=name,
                    value=f"sup ratio {result.sup_ratio:.4g}",
                    status="pass" if result.passed else "fail",
                )
            )
        return ExperimentSummary(
            command=self.command,
            rows=rows,
            outputs=[str(output)],
            failed=any(not result.passed for result in results),
        )
