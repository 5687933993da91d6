"""
CSV and JSON report writers.

Floats are written with repr so that rereading them reproduces the same doubles.
"""

import csv
import json
from pathlib import Path
from typing import Any, Sequence, Union

from pydantic import BaseModel

from schemas.report_schema import NormReport


def norms_columns(deltas: Sequence[float]) -> list[str]:
    """t, h_r_l2, triple_r0, weighted_m_delta_<δ>…, weighted_g_delta_<δ>…, sobolev_hs, vweight."""
    return (
        ["t", "h_r_l2", "triple_r0"]
        + [f"weighted_m_delta_{delta!r}" for delta in deltas]
        + [f"weighted_g_delta_{delta!r}" for delta in deltas]
        + ["sobolev_hs", "vweight"]
    )


def norms_row(report: NormReport, deltas: Sequence[float]) -> list[float]:
    return (
        [report.t, report.h_r_l2, report.triple_r0]
        + [report.weighted_m[repr(delta)] for delta in deltas]
        + [report.weighted_g[repr(delta)] for delta in deltas]
        + [report.sobolev_hs, report.vweight]
    )


def write_norms_csv(path: Union[str, Path], reports: Sequence[NormReport], deltas: Sequence[float]) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(norms_columns(deltas))
        for report in reports:
            writer.writerow([repr(float(value)) for value in norms_row(report, deltas)])
    return path


def read_norms_csv(path: Union[str, Path]) -> list[dict[str, float]]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        return [{key: float(value) for key, value in row.items()} for row in csv.DictReader(handle)]


def to_jsonable(payload: Any) -> Any:
    """Pydantic models dump with their aliases ("pass")."""
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json", by_alias=True)
    if isinstance(payload, dict):
        return {str(key): to_jsonable(value) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [to_jsonable(item) for item in payload]
    return payload


def write_json(path: Union[str, Path], payload: Any) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path
