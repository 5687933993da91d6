"""
Run configuration: one nested model per config-file section.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from services.collision import CrossSection, QuadratureConfig
from services.corpus import InitialKind
from services.errors import ConfigError
from services.grid import GridSpec
from services.multiplier import DEFAULT_DELTAS, MultiplierParams, PsiEvaluator
from services.solver import SolverConfig
from services.verify import VerifyConfig


# ================================================
# Sections
# ================================================
class MultiplierBlock(BaseModel):
    """Weight parameters; s comes from the cross section."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    c0: Optional[float] = Field(default=None, gt=0.0)  # None: selected by the energy audit
    delta: float = Field(default=1e-2, gt=0.0, lt=1.0)
    r: float = Field(default=1.0, gt=0.5)


class SolverBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dt: float = Field(default=0.01, gt=0.0)
    T: float = Field(default=0.5, gt=0.0)
    scheme: Literal["picard", "direct"] = "picard"
    picard_tol: float = Field(default=1e-8, gt=0.0)
    picard_max_iter: int = Field(default=30, ge=1)
    eps0: float = Field(default=1e-3, ge=0.0)
    stability_constant: float = Field(default=2.5, gt=0.0)
    deltas: tuple[float, ...] = DEFAULT_DELTAS
    snapshot_every: int = Field(default=1, ge=1)
    audit_kinds: tuple[Literal["M", "G"], ...] = ("M", "G")
    control_audit: bool = True  # Kinetic identity on Kolmogorov dynamics from the same datum


class KolmogorovBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    t_min: float = Field(default=0.75, gt=0.0)
    t_max: float = Field(default=2.0, gt=0.0)
    n_times: int = Field(default=6, ge=3)
    directions: tuple[Literal["x", "v", "velocity-decay"], ...] = ("x", "v")
    audit: bool = True
    audit_step: float = Field(default=1e-3, gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> "KolmogorovBlock":
        if self.t_max <= self.t_min:
            raise ValueError(f"t_max ({self.t_max}) must exceed t_min ({self.t_min})")
        return self

    @property
    def times(self) -> list[float]:
        """t = 0 followed by n_times uniform times on [t_min, t_max]."""
        step = (self.t_max - self.t_min) / (self.n_times - 1)
        return [0.0] + [self.t_min + k * step for k in range(self.n_times)]


class InitialBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Optional[InitialKind] = None  # None: "point" for kolmogorov, "corpus" for simulate
    amplitude: float = 1.0
    wavenumber: int = Field(default=1, ge=0)
    degree: int = Field(default=2, ge=0)


# ================================================
# Run configuration
# ================================================
class RunConfig(BaseModel):
    """A complete, validated run configuration."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    grid: GridSpec = GridSpec()
    cross_section: CrossSection = CrossSection(s=0.25)
    quadrature: QuadratureConfig = QuadratureConfig()
    multiplier: MultiplierBlock = MultiplierBlock()
    solver: SolverBlock = SolverBlock()
    kolmogorov: KolmogorovBlock = KolmogorovBlock()
    verify: VerifyConfig = VerifyConfig()
    initial: InitialBlock = InitialBlock()
    seed: int = Field(default=0, ge=0, lt=2**64)

    @field_validator("solver")
    @classmethod
    def _deltas_in_range(cls, value: SolverBlock) -> SolverBlock:
        if not value.deltas or any(not 0.0 < d < 1.0 for d in value.deltas):
            raise ValueError(f"solver.deltas must be nonempty and lie in (0, 1), got {value.deltas}")
        return value

    @property
    def s(self) -> float:
        return self.cross_section.s

    def multiplier_params(self, c0: Optional[float] = None) -> MultiplierParams:
        block = self.multiplier
        return MultiplierParams(s=self.s, c0=c0 or block.c0 or 0.5, delta=block.delta, r=block.r)

    def psi(self, c0: Optional[float] = None) -> PsiEvaluator:
        return PsiEvaluator(params=self.multiplier_params(c0))

    def solver_config(self, c0: Optional[float] = None) -> SolverConfig:
        """
        Raises:
            ConfigError: The combined sections violate a solver invariant
        """
        block = self.solver
        try:
            return SolverConfig(
                cs=self.cross_section,
                quadrature=self.quadrature,
                multiplier=self.multiplier_params(c0),
                dt=block.dt,
                T=block.T,
                scheme=block.scheme,
                picard_tol=block.picard_tol,
                picard_max_iter=block.picard_max_iter,
                eps0=block.eps0,
                stability_constant=block.stability_constant,
                deltas=block.deltas,
                snapshot_every=block.snapshot_every,
            )
        except ValidationError as e:
            raise ConfigError(f"invalid solver configuration: {e}") from e

    def verify_config(self, workers: Optional[int] = None) -> VerifyConfig:
        """The verify section with the run seed and worker count applied."""
        return self.verify.model_copy(update={"seed": self.seed, "workers": workers or self.verify.workers})

    def with_seed(self, seed: Optional[int]) -> "RunConfig":
        if seed is None:
            return self
        try:
            return RunConfig.model_validate({**self.model_dump(), "seed": seed})
        except ValidationError as e:
            raise ConfigError(f"invalid seed {seed}: {e}") from e
