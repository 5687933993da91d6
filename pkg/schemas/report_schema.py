"""
Report schemas emitted by lemma checkers, ratio suites, norms and audits.
"""

from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class LemmaReport(BaseModel):
    """Outcome of one sampled inequality or identity check."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    lemma: str  # Checker name, e.g. "bd" or "transport"
    n_samples: int
    sup_ratio: float  # Largest observed ratio (or deviation for identities)
    params: dict[str, float] = Field(default_factory=dict)
    passed: bool = Field(alias="pass")
    details: dict[str, Any] = Field(default_factory=dict)


class ConvergenceReport(BaseModel):
    """Self-convergence of a collision quadrature under one refinement."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    op: str
    eps: float
    delta_refine: float  # Relative change of the output under refinement
    tol: float
    passed: bool = Field(alias="pass")


class RatioEntry(BaseModel):
    """Sup ratio of one suite configuration (δ, s, grid)."""

    model_config = ConfigDict(frozen=True)

    label: str
    sup_ratio: float
    n_used: int  # Corpus items with nonzero denominators
    n_degenerate: int = 0
    extra: dict[str, float] = Field(default_factory=dict)


class RatioSuite(BaseModel):
    """Empirical-constant estimate for one operator inequality."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    name: str
    corpus_size: int
    seed: int
    entries: list[RatioEntry] = Field(default_factory=list)
    sup_ratio: float  # Max over entries
    stability: dict[str, float] = Field(default_factory=dict)  # Spread/drift measures
    passed: bool = Field(alias="pass")
    message: str = ""


class NormReport(BaseModel):
    """All tracked norms of a perturbation at one time."""

    model_config = ConfigDict(frozen=True)

    t: float
    h_r_l2: float
    triple_r0: float
    weighted_m: dict[str, float] = Field(default_factory=dict)  # keyed by δ repr
    weighted_g: dict[str, float] = Field(default_factory=dict)
    sobolev_hs: float
    vweight: float
    triple_m: dict[str, float] = Field(default_factory=dict)  # |||M_δ g|||_{(r,0)} per δ


class FitReport(BaseModel):
    """Fitted smoothing radius and its growth exponent in time."""

    model_config = ConfigDict(frozen=True)

    direction: Literal["x", "v", "velocity-decay"]
    radius_estimate: float  # Prefactor c of ρ(t) = c·t^p
    exponent_estimate: float  # p
    r2: float
    window: dict[str, Any] = Field(default_factory=dict)
    rates: list[float] = Field(default_factory=list)  # ρ(t) per time
    times: list[float] = Field(default_factory=list)


class AuditReport(BaseModel):
    """Energy inequality audit over a trajectory."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    kind: Literal["M", "G", "kolmogorov"]
    c1: float
    c1_tilde: float
    times: list[float] = Field(default_factory=list)
    margins: list[float] = Field(default_factory=list)
    fraction_nonneg: float
    gronwall_ok: Optional[bool] = None
    residual: Optional[float] = None  # Kinetic identity residual (Kolmogorov audit)
    passed: bool = Field(alias="pass")
    details: dict[str, Any] = Field(default_factory=dict)


class SummaryRow(BaseModel):
    """One line of the end-of-run table."""

    model_config = ConfigDict(frozen=True)

    name: str
    value: str
    status: Literal["pass", "fail", "info"] = "info"


class ExperimentSummary(BaseModel):
    """Outcome of one subcommand."""

    model_config = ConfigDict(frozen=True)

    command: str
    rows: list[SummaryRow] = Field(default_factory=list)
    outputs: list[str] = Field(default_factory=list)
    failed: bool = False  # Any suite or audit failed
