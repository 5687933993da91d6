"""
KACFIELD-v1 field snapshots.

Layout: the 24-byte magic line, one JSON header line {Lv, Lx, Nv, Nx, t} with
sorted keys, then Nx·Nv little-endian float64 values in row-major (x, v) order.
"""

import json
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from services.errors import ConfigError, GridError
from services.grid import GridSpec, PhaseField

MAGIC = b"KACFIELD-v1".ljust(23) + b"\n"
SUFFIX = ".kacf"


def write_snapshot(path: Union[str, Path], field: PhaseField, t: float) -> Path:
    path = Path(path)
    spec = field.spec
    header = {"Nx": spec.Nx, "Nv": spec.Nv, "Lx": spec.Lx, "Lv": spec.Lv, "t": float(t)}
    payload = np.ascontiguousarray(field.data, dtype="<f8").tobytes(order="C")
    path.write_bytes(MAGIC + json.dumps(header, sort_keys=True).encode("utf-8") + b"\n" + payload)
    return path


def read_snapshot(path: Union[str, Path]) -> tuple[float, PhaseField]:
    """
    Raises:
        ConfigError: Unreadable file, wrong magic or malformed header
        GridError: Payload size does not match the header grid
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read snapshot '{path}': {e}") from e
    if not raw.startswith(MAGIC):
        raise ConfigError(f"'{path}' is not a KACFIELD-v1 snapshot")
    end = raw.find(b"\n", len(MAGIC))
    if end < 0:
        raise ConfigError(f"'{path}': missing snapshot header")
    try:
        header = json.loads(raw[len(MAGIC):end].decode("utf-8"))
        spec = GridSpec(Nx=header["Nx"], Nv=header["Nv"], Lx=header["Lx"], Lv=header["Lv"])
        t = float(header["t"])
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"'{path}': malformed snapshot header: {e}") from e
    payload = raw[end + 1:]
    if len(payload) != 8 * spec.Nx * spec.Nv:
        raise GridError(f"'{path}': {len(payload)} payload bytes for a {spec.Nx}x{spec.Nv} grid")
    data = np.frombuffer(payload, dtype="<f8").reshape(spec.shape)
    return t, PhaseField(spec=spec, data=data)


def snapshot_name(index: int) -> str:
    return f"field_{index:05d}{SUFFIX}"


def write_snapshots(directory: Union[str, Path], times: Sequence[float], fields: Sequence[PhaseField]) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return [write_snapshot(directory / snapshot_name(k), field, t) for k, (t, field) in enumerate(zip(times, fields))]


def read_snapshot_dir(directory: Union[str, Path]) -> list[tuple[float, PhaseField]]:
    """Every snapshot in a directory, ordered by time.

    Raises:
        ConfigError: Missing directory or no snapshots in it
        GridError: Snapshots on different grids
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"snapshot directory '{directory}' does not exist")
    snapshots = sorted((read_snapshot(path) for path in sorted(directory.glob(f"*{SUFFIX}"))), key=lambda item: item[0])
    if not snapshots:
        raise ConfigError(f"no {SUFFIX} snapshots in '{directory}'")
    if any(field.spec != snapshots[0][1].spec for _, field in snapshots):
        raise GridError(f"snapshots in '{directory}' are on different grids")
    return snapshots
