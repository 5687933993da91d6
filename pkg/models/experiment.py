"""
Base class for the batch experiments behind each subcommand.

An experiment owns an output directory: it writes the manifest before any
computation, collects its outputs, and finalizes the manifest with their hashes.
"""

from pathlib import Path
from typing import Optional, Sequence

import logfire

from schemas.config_schema import RunConfig
from schemas.manifest_schema import RunManifest
from schemas.report_schema import ExperimentSummary
from services.grid import PhaseField
from services.corpus import InitialKind, initial_field
from storage.manifest import finalize_manifest, start_manifest


class Experiment:
    """
    Common lifecycle of a run.

    Subclasses set `command` and implement `execute()`, returning the summary
    shown at the end of the run.
    """

    command: str = ""
    default_initial: InitialKind = "corpus"

    def __init__(
        self,
        config: RunConfig,
        out_dir: Path,
        workers: Optional[int] = None,
        inputs: Sequence[Path] = (),
    ) -> None:
        self.config: RunConfig = config
        self.out_dir: Path = Path(out_dir)
        self.workers: Optional[int] = workers
        self.inputs: list[Path] = [Path(path) for path in inputs]
        self.manifest: Optional[RunManifest] = None
        logfire.info(f"{self.command} experiment initialized, output directory {self.out_dir}")

    def initial(self) -> PhaseField:
        """Initial datum of the config, with the command's default kind."""
        block = self.config.initial
        return initial_field(
            block.kind or self.default_initial,
            self.config.grid,
            seed=self.config.seed,
            amplitude=block.amplitude,
            wavenumber=block.wavenumber,
            degree=block.degree,
        )

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def start(self) -> RunManifest:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.manifest = start_manifest(self.out_dir, self.command, self.config, self.inputs, self.workers)
        return self.manifest

    def finish(self, exit_code: int) -> Optional[RunManifest]:
        if self.manifest is None:
            return None
        self.manifest = finalize_manifest(self.out_dir, self.manifest, exit_code)
        return self.manifest

    def execute(self) -> ExperimentSummary:
        raise NotImplementedError

    def run(self) -> ExperimentSummary:
        """
        Start the manifest, execute, and finalize with exit code 0 or 1.

        Errors propagate after the manifest is finalized with exit code -1; the
        handler maps them to the process exit code.
        """
        self.start()
        try:
            summary = self.execute()
        except Exception:
            self.finish(-1)
            raise
        self.finish(1 if summary.failed else 0)
        logfire.info(f"{self.command} finished: {len(summary.outputs)} outputs, failed={summary.failed}")
        return summary
