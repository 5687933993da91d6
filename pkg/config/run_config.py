"""
Run-config file parsing.

Two formats are accepted: a JSON object (also a run manifest, whose `config`
block is used), or flat sectioned lines

    # comment
    grid.Nx = 64
    solver.deltas = [0.01, 0.001]
    verify.grids = [{"Nx": 8, "Nv": 32}, {"Nx": 16, "Nv": 64}]

where values are decoded as JSON when possible and kept as strings otherwise.
"""

import json
from pathlib import Path
from typing import Any, Optional, Union

import logfire
from pydantic import ValidationError

from schemas.config_schema import RunConfig
from services.errors import ConfigError


def _decode(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_flat(text: str) -> dict[str, Any]:
    """
    Nested dict from `section.key = value` lines.

    Raises:
        ConfigError: A line without '=', an empty key segment, or a key set twice
    """
    data: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got '{line}'")
        key, raw = (part.strip() for part in line.split("=", 1))
        path = key.split(".")
        if not all(path):
            raise ConfigError(f"line {lineno}: malformed key '{key}'")
        node = data
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"line {lineno}: '{part}' is both a value and a section")
            node = child
        if path[-1] in node:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        node[path[-1]] = _decode(raw)
    return data


def parse_run_config(text: str) -> RunConfig:
    """
    Raises:
        ConfigError: Malformed text or a value violating a parameter invariant
    """
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed JSON config: {e}") from e
        if isinstance(data, dict) and "command" in data and isinstance(data.get("config"), dict):
            data = data["config"]
    else:
        data = parse_flat(text)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid run config: {e}") from e


def load_run_config(path: Optional[Union[str, Path]]) -> RunConfig:
    """Defaults when no path is given."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config '{path}': {e}") from e
    config = parse_run_config(text)
    logfire.info(f"loaded run config from {path}")
    return config
