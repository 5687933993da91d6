"""
Run manifests: config snapshot and seeds before the run, output hashes after.
"""

import hashlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence, Union

import logfire

from config.settings import settings
from schemas.config_schema import RunConfig
from schemas.manifest_schema import RunManifest
from storage.writers import write_json

MANIFEST_NAME = "manifest.json"


def sha256_file(path: Union[str, Path], block_size: int = 1 << 20) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        while chunk := handle.read(block_size):
            digest.update(chunk)
    return digest.hexdigest()


def start_manifest(
    out_dir: Path,
    command: str,
    config: RunConfig,
    inputs: Sequence[Path] = (),
    workers: Optional[int] = None,
) -> RunManifest:
    """Write the config part of the manifest into out_dir."""
    manifest = RunManifest(
        command=command,
        version=settings.APP_VERSION,
        config=config.model_dump(mode="json"),
        seeds={"run": config.seed, "corpus": config.seed},
        workers=workers or settings.WORKERS,
        started_at=datetime.now(timezone.utc),
        inputs={str(path): sha256_file(path) for path in inputs if Path(path).is_file()},
    )
    write_json(out_dir / MANIFEST_NAME, manifest)
    logfire.info(f"{command}: manifest started in {out_dir}")
    return manifest


def output_hashes(out_dir: Path) -> dict[str, str]:
    """sha256 of every file under out_dir except the manifest, keyed by relative path."""
    return {
        path.relative_to(out_dir).as_posix(): sha256_file(path)
        for path in sorted(out_dir.rglob("*"))
        if path.is_file() and path.name != MANIFEST_NAME
    }


def finalize_manifest(out_dir: Path, manifest: RunManifest, exit_code: int) -> RunManifest:
    final = manifest.model_copy(
        update={
            "finished_at": datetime.now(timezone.utc),
            "exit_code": exit_code,
            "outputs": output_hashes(out_dir),
        }
    )
    write_json(out_dir / MANIFEST_NAME, final)
    logfire.info(f"{manifest.command}: manifest finalized with {len(final.outputs)} outputs, exit code {exit_code}")
    return final
