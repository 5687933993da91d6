"""
Time evolution of the perturbation g.

    ∂_t g + v∂_x g + ℒg = 𝒦(g, g)

Transport is solved exactly in the mixed (η, v) representation and the truncated
collision operator is integrated with classical RK4; the two are combined by
Strang splitting. The Picard scheme freezes the first slot of 𝒦 at the previous
iterate, storing that iterate's RK4 stage states so its fixed point is the direct
nonlinear scheme.

The fractional Kolmogorov problem ∂_t f + v∂_x f + (1 − Δ_v)^s f = 0 is solved
exactly through

    f̂(t, η, ξ) = exp(−∫₀ᵗ⟨ξ + ρη⟩^{2s}dρ) f̂₀(η, ξ + tη)
"""

import math
from functools import lru_cache
from typing import Literal, Optional, Sequence, Union

import logfire
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from schemas.report_schema import AuditReport, NormReport
from services.collision import (
    CollisionQuadrature,
    CrossSection,
    LinearizedOperator,
    QuadratureConfig,
    TrilinearTensor,
    build_quadrature,
    linearized_operator,
    trilinear_tensor,
)
from services.errors import AuditError, GridError, ParameterError, PicardNonConvergence, StabilityError
from services.grid import GridSpec, PhaseField, SpectralField, fft_v, fft_x, fft_xv, ifft_v, ifft_x, inverse
from services.multiplier import DEFAULT_DELTAS, MultiplierParams, PsiEvaluator, g_delta, japanese, m_delta_grid, rho_integral
from services.norms import apply_m_delta, norm_hr_l2, norm_report, triple_norm_r0

TINY = float(np.finfo(np.float64).tiny)
_RK4_NODES = (0.0, 0.5, 0.5, 1.0)


# ================================================
# Configuration and trajectory
# ================================================
class SolverConfig(BaseModel):
    """Parameters of a Kac run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cs: CrossSection
    quadrature: QuadratureConfig = QuadratureConfig()
    multiplier: MultiplierParams
    dt: float = Field(default=0.01, gt=0.0)
    T: float = Field(default=0.5, gt=0.0)
    scheme: Literal["picard", "direct"] = "picard"
    picard_tol: float = Field(default=1e-8, gt=0.0)  # Relative to sup_t ||g||_{H^r}
    picard_max_iter: int = Field(default=30, ge=1)
    eps0: float = Field(default=1e-3, ge=0.0)  # ||g0||_{H^r} after scaling
    stability_constant: float = Field(default=2.5, gt=0.0)
    deltas: tuple[float, ...] = DEFAULT_DELTAS
    snapshot_every: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _matching_order(self) -> "SolverConfig":
        if not math.isclose(self.cs.s, self.multiplier.s):
            raise ValueError(f"cross-section order s={self.cs.s} differs from multiplier s={self.multiplier.s}")
        if any(not 0.0 < delta < 1.0 for delta in self.deltas):
            raise ValueError(f"every delta must lie in (0, 1), got {self.deltas}")
        return self

    @property
    def q(self) -> CollisionQuadrature:
        return build_quadrature(self.quadrature)

    @property
    def psi(self) -> PsiEvaluator:
        return PsiEvaluator(params=self.multiplier)

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.T / self.dt - 1e-9)))

    @property
    def step(self) -> float:
        """Time step actually taken, T / n_steps."""
        return self.T / self.n_steps

    def with_c0(self, c0: float) -> "SolverConfig":
        return self.model_copy(update={"multiplier": self.multiplier.with_c0(c0)})


class Trajectory(BaseModel):
    """Snapshots of one run, append-only."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    scheme: str
    times: list[float] = Field(default_factory=list)
    fields: list[PhaseField] = Field(default_factory=list)
    reports: list[NormReport] = Field(default_factory=list)
    picard_deltas: list[float] = Field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    audit_residuals: list[float] = Field(default_factory=list)

    @property
    def spec(self) -> Optional[GridSpec]:
        return self.fields[0].spec if self.fields else None

    def append(self, t: float, field: PhaseField, report: Optional[NormReport] = None) -> None:
        if self.times and t <= self.times[-1]:
            raise ParameterError(f"snapshot time {t} does not follow {self.times[-1]}")
        if self.fields and field.spec != self.fields[0].spec:
            raise GridError("trajectory snapshots must share one grid")
        self.times.append(float(t))
        self.fields.append(field)
        if report is not None:
            self.reports.append(report)


# ================================================
# Exact Kolmogorov solver and transport
# ================================================
def transport_eta(spec: GridSpec) -> np.ndarray:
    """Wavenumbers used for transport; the unpaired Nyquist mode is left at rest."""
    eta = spec.eta.copy()
    eta[spec.Nx // 2] = 0.0
    return eta


def _transport_phase(spec: GridSpec, dt: float) -> np.ndarray:
    return np.exp(-1j * dt * np.multiply.outer(transport_eta(spec), spec.v))


def solve_kolmogorov_spectral(f0: PhaseField, s: float, t: float) -> SpectralField:
    """Exact transform of the fractional Kolmogorov solution at time t."""
    if t < 0:
        raise ParameterError(f"Kolmogorov solution needs t >= 0, got {t}")
    if not 0.0 < s < 1.0:
        raise ParameterError(f"fractional order must lie in (0, 1), got {s}")
    spec = f0.spec
    shifted = fft_v(fft_x(f0.data, spec) * _transport_phase(spec, t), spec)
    eta_mesh, xi_mesh = np.meshgrid(transport_eta(spec), spec.xi, indexing="ij")
    decay = np.exp(-rho_integral(np.full(eta_mesh.shape, float(t)), eta_mesh, xi_mesh, 2.0 * s))
    return SpectralField(spec=spec, coef=decay * shifted)


def solve_kolmogorov_exact(f0: PhaseField, s: float, t: float) -> PhaseField:
    return inverse(solve_kolmogorov_spectral(f0, s, t))


def kolmogorov_trajectory(f0: PhaseField, s: float, times: Sequence[float]) -> list[SpectralField]:
    """Exact spectral solutions at strictly increasing times."""
    times = [float(t) for t in times]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ParameterError("Kolmogorov times must be strictly increasing")
    with logfire.span(f"kolmogorov trajectory s={s} at {len(times)} times"):
        return [solve_kolmogorov_spectral(f0, s, t) for t in times]


def _kolmogorov_terms(f0: PhaseField, s: float, p: PsiEvaluator, t: float) -> tuple[float, float, float]:
    """(E, W, I_kin) of ||M_δ f||²_{H^r} at time t."""
    spec = f0.spec
    params = p.params
    coef = solve_kolmogorov_spectral(f0, s, t).coef
    m = m_delta_grid(t, transport_eta(spec), spec.xi, p)
    weight = japanese(spec.eta)[:, None] ** (2.0 * params.r) * (spec.d_eta * spec.d_xi)
    density = weight * m * m * np.abs(coef) ** 2
    bracket = japanese(spec.xi)[None, :]
    energy = float(np.sum(density))
    gain = float(np.sum(params.c0 * bracket**params.sigma * (1.0 - params.delta * m) * density))
    loss = -float(np.sum(bracket ** (2.0 * s) * density))
    return energy, gain, loss


def kolmogorov_audit(
    f0: PhaseField,
    s: float,
    p: PsiEvaluator,
    times: Sequence[float],
    h: float = 1e-3,
    tol: float = 1e-6,
) -> AuditReport:
    """
    Kinetic-part energy identity on exact Kolmogorov dynamics:

        ½ d/dt ||M_δ f||² = (c0⟨ξ⟩^{2s̃}(1 − δM_δ)M_δ f̂, M_δ f̂) − (⟨ξ⟩^{2s}M_δ f̂, M_δ f̂)

    The derivative is a Richardson-extrapolated central difference of step h.

    Raises:
        AuditError: No requested time leaves room for the difference stencil
    """
    usable = [float(t) for t in times if t >= 2.0 * h]
    if not usable:
        raise AuditError(f"Kolmogorov audit needs times >= {2.0 * h}")
    residuals = []
    for t in usable:
        energy = [_kolmogorov_terms(f0, s, p, t + k * h)[0] for k in (-2, -1, 1, 2)]
        derivative = (8.0 * (energy[2] - energy[1]) - (energy[3] - energy[0])) / (12.0 * h)
        _, gain, loss = _kolmogorov_terms(f0, s, p, t)
        residuals.append(abs(0.5 * derivative - gain - loss) / (abs(gain) + abs(loss) + TINY))
    worst = max(residuals)
    logfire.info(f"kolmogorov audit s={s}: max identity residual {worst:.2e} over {len(usable)} times")
    return AuditReport(
        kind="kolmogorov",
        c1=0.0,
        c1_tilde=0.0,
        times=usable,
        margins=residuals,
        fraction_nonneg=float(np.mean(np.asarray(residuals) <= tol)),
        residual=worst,
        passed=bool(worst <= tol),
        details={"h": h, "tol": tol, "s": s},
    )


def mollify_initial(g0: PhaseField, t_moll: float) -> PhaseField:
    """e^{−t(1 − Δ_{x,v})} g0 as a Fourier multiplier."""
    if t_moll < 0:
        raise ParameterError(f"mollification time must be nonnegative, got {t_moll}")
    if t_moll == 0:
        return g0
    spec = g0.spec
    eta_mesh, xi_mesh = spec.dual_mesh()
    coef = fft_xv(g0.data, spec) * np.exp(-t_moll * (1.0 + eta_mesh**2 + xi_mesh**2))
    return inverse(SpectralField(spec=spec, coef=coef))


def _transport(data: np.ndarray, spec: GridSpec, dt: float) -> np.ndarray:
    return ifft_x(fft_x(data, spec) * _transport_phase(spec, dt), spec).real


def step_transport(g: PhaseField, dt: float) -> PhaseField:
    """Exact free transport over dt, an isometry of L²."""
    if dt == 0:
        return g
    return g.with_data(_transport(g.data, g.spec, dt))


# ================================================
# Collision sub-step
# ================================================
class CollisionStepper(BaseModel):
    """Right-hand side −ℒy + 𝒦(frozen, y) on (Nx, Nv) sample arrays."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: GridSpec
    linear: LinearizedOperator
    tensor: TrilinearTensor

    def calK(self, frozen: np.ndarray, y: np.ndarray) -> np.ndarray:
        values = self.tensor.apply(frozen.astype(np.complex128), y.astype(np.complex128))
        return ifft_v(values, self.spec).real

    def rhs(self, frozen: Optional[np.ndarray], y: np.ndarray) -> np.ndarray:
        out = -self.linear.apply_physical(y)
        if frozen is None:
            return out + self.calK(y, y)
        if np.any(frozen):
            out = out + self.calK(frozen, y)
        return out

    def rk4(
        self,
        y: np.ndarray,
        frozen: Optional[Sequence[np.ndarray]],
        dt: float,
        step: Optional[int] = None,
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        """One RK4 step; returns the new state and the four stage states."""
        stages, slopes = [], []
        state = y
        for i in range(4):
            if i > 0:
                state = y + (dt if i == 3 else 0.5 * dt) * slopes[-1]
            stages.append(state)
            # Direct scheme when nothing is frozen: each stage pairs with itself.
            slopes.append(self.rhs(state if frozen is None else frozen[i], state))
        y_new = y + (dt / 6.0) * (slopes[0] + 2.0 * slopes[1] + 2.0 * slopes[2] + slopes[3])
        if not np.all(np.isfinite(y_new)):
            raise StabilityError(f"non-finite state in collision step {step}", step=step)
        return y_new, stages


@lru_cache(maxsize=8)
def collision_stepper(spec: GridSpec, config: QuadratureConfig, cs: CrossSection) -> CollisionStepper:
    return CollisionStepper(
        spec=spec,
        linear=linearized_operator(spec, config, cs),
        tensor=trilinear_tensor(spec, config, cs, 0.5),
    )


def stability_bound(spec: GridSpec, cfg: SolverConfig, iterations: int = 500, seed: int = 0) -> tuple[float, float]:
    """
    Operator norm of the discrete ℒ by power iteration on ℒᵀℒ, and the largest
    admissible dt = stability_constant / norm.
    """
    matrix = collision_stepper(spec, cfg.quadrature, cfg.cs).linear.physical
    rng = np.random.default_rng(seed)
    vector = rng.standard_normal(spec.Nv)
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for _ in range(iterations):
        image = matrix.T @ (matrix @ vector)
        size = float(np.linalg.norm(image))
        if size == 0.0:
            return 0.0, math.inf
        vector = image / size
        if abs(size - estimate) <= 1e-12 * size:
            break
        estimate = size
    norm = math.sqrt(size)
    return norm, cfg.stability_constant / norm


def _require_stable(spec: GridSpec, cfg: SolverConfig) -> None:
    norm, dt_max = stability_bound(spec, cfg)
    logfire.debug(f"collision operator norm {norm:.4g}, dt_max {dt_max:.4g}")
    if cfg.step > dt_max:
        raise StabilityError(f"time step {cfg.step:.4g} exceeds stability bound {dt_max:.4g} (||L|| = {norm:.4g})")


def _frozen_stages(gn_frozen: Union[PhaseField, Sequence[np.ndarray], None], spec: GridSpec):
    if gn_frozen is None:
        return None
    if isinstance(gn_frozen, PhaseField):
        if gn_frozen.spec != spec:
            raise GridError(f"frozen field grid {gn_frozen.spec} differs from {spec}")
        return [gn_frozen.data] * 4
    stages = [np.asarray(stage, dtype=np.float64) for stage in gn_frozen]
    if len(stages) != 4 or any(stage.shape != spec.shape for stage in stages):
        raise GridError(f"frozen stages must be four arrays of shape {spec.shape}")
    return stages


def step_collision_linear(
    g: PhaseField,
    gn_frozen: Union[PhaseField, Sequence[np.ndarray], None],
    dt: float,
    cfg: SolverConfig,
) -> PhaseField:
    """
    One RK4 step of ∂_t g = −ℒg + 𝒦(g^n, g).

    `gn_frozen` is a field held fixed over the step, the four RK4 stage states of
    a previous iterate, or None for the direct form −ℒg + 𝒦(g, g).
    """
    stepper = collision_stepper(g.spec, cfg.quadrature, cfg.cs)
    y_new, _ = stepper.rk4(g.data, _frozen_stages(gn_frozen, g.spec), dt)
    return g.with_data(y_new)


def _strang(
    data: np.ndarray,
    frozen: Optional[Sequence[np.ndarray]],
    dt: float,
    stepper: CollisionStepper,
    step: Optional[int] = None,
) -> tuple[np.ndarray, list[np.ndarray]]:
    spec = stepper.spec
    half = _transport(data, spec, 0.5 * dt)
    collided, stages = stepper.rk4(half, frozen, dt, step)
    return _transport(collided, spec, 0.5 * dt), stages


def step_strang(
    g: PhaseField,
    frozen: Union[PhaseField, Sequence[np.ndarray], None],
    dt: float,
    cfg: SolverConfig,
) -> PhaseField:
    """Half transport, collision over dt, half transport."""
    stepper = collision_stepper(g.spec, cfg.quadrature, cfg.cs)
    data, _ = _strang(g.data, _frozen_stages(frozen, g.spec), dt, stepper)
    return g.with_data(data)


# ================================================
# Runs
# ================================================
def _scaled_initial(g0: PhaseField, cfg: SolverConfig) -> PhaseField:
    size = norm_hr_l2(g0, cfg.multiplier.r)
    if size == 0.0 or cfg.eps0 == 0.0:
        return g0.zeros(g0.spec)
    return g0.scaled(cfg.eps0 / size)


def _hr(data: np.ndarray, spec: GridSpec, r: float) -> float:
    return norm_hr_l2(PhaseField(spec=spec, data=data), r)


def _snapshot_steps(cfg: SolverConfig) -> list[int]:
    steps = list(range(0, cfg.n_steps + 1, cfg.snapshot_every))
    if steps[-1] != cfg.n_steps:
        steps.append(cfg.n_steps)
    return steps


def _trajectory(states: list[np.ndarray], spec: GridSpec, cfg: SolverConfig, scheme: str) -> Trajectory:
    traj = Trajectory(scheme=scheme)
    p, q = cfg.psi, cfg.q
    with logfire.span(f"norm reports for {scheme} run"):
        for k in _snapshot_steps(cfg):
            t = k * cfg.step
            field = PhaseField(spec=spec, data=states[k])
            traj.append(t, field, norm_report(field, t, p, cfg.deltas, q, cfg.cs))
    return traj


def run_direct(g0: PhaseField, cfg: SolverConfig) -> Trajectory:
    """Strang-split integration of the full nonlinear equation."""
    spec = g0.spec
    start = _scaled_initial(g0, cfg)
    _require_stable(spec, cfg)
    stepper = collision_stepper(spec, cfg.quadrature, cfg.cs)
    states = [start.data]
    with logfire.span(f"direct run T={cfg.T} dt={cfg.step:.4g} steps={cfg.n_steps}"):
        for k in range(cfg.n_steps):
            data, _ = _strang(states[-1], None, cfg.step, stepper, k)
            states.append(data)
    traj = _trajectory(states, spec, cfg, "direct")
    traj.iterations = 1
    return traj


def run_picard(g0: PhaseField, cfg: SolverConfig) -> Trajectory:
    """
    Picard iteration g^n -> g^{n+1} over [0, T].

    The zeroth iterate is the mollified datum e^{−t(1−Δ)}g0. Each sweep freezes
    the previous iterate's RK4 stage states and integrates the linear problem.

    Raises:
        StabilityError: dt above the stability bound, or a non-finite state
        PicardNonConvergence: Tolerance not reached within picard_max_iter
    """
    spec = g0.spec
    start = _scaled_initial(g0, cfg)
    _require_stable(spec, cfg)
    stepper = collision_stepper(spec, cfg.quadrature, cfg.cs)
    dt, r = cfg.step, cfg.multiplier.r
    previous_stages = [
        [mollify_initial(start, (k + c) * dt).data for c in _RK4_NODES] for k in range(cfg.n_steps)
    ]
    previous_states = [mollify_initial(start, k * dt).data for k in range(cfg.n_steps + 1)]
    deltas: list[float] = []
    with logfire.span(f"picard run T={cfg.T} dt={dt:.4g} steps={cfg.n_steps}"):
        for n in range(1, cfg.picard_max_iter + 1):
            states, stages = [start.data], []
            for k in range(cfg.n_steps):
                data, stage = _strang(states[-1], previous_stages[k], dt, stepper, k)
                states.append(data)
                stages.append(stage)
            scale = max(_hr(state, spec, r) for state in states)
            change = max(_hr(a - b, spec, r) for a, b in zip(states, previous_states))
            delta = change / max(scale, TINY)
            deltas.append(delta)
            logfire.info(f"picard iteration {n}: relative change {delta:.3e}")
            previous_states, previous_stages = states, stages
            if delta < cfg.picard_tol:
                break
        else:
            logfire.error(f"picard iteration stalled after {cfg.picard_max_iter} sweeps")
            raise PicardNonConvergence(
                f"Picard iteration did not reach {cfg.picard_tol:.1e} in {cfg.picard_max_iter} iterations",
                last_deltas=tuple(deltas[-2:]),
            )
    traj = _trajectory(previous_states, spec, cfg, "picard")
    traj.picard_deltas = deltas
    traj.iterations = len(deltas)
    return traj


def run(g0: PhaseField, cfg: SolverConfig) -> Trajectory:
    return run_picard(g0, cfg) if cfg.scheme == "picard" else run_direct(g0, cfg)


# ================================================
# Energy audit
# ================================================
def _energy_terms(g: PhaseField, t: float, cfg: SolverConfig, kind: str) -> tuple[float, float, float, float, float]:
    """(E, W, I_lin, I_nl, T) for E = ||M_δg||² or ||G_δg||² in H^r_x(L²_v)."""
    spec = g.spec
    params = cfg.multiplier
    p = cfg.psi
    stepper = collision_stepper(spec, cfg.quadrature, cfg.cs)
    lin = stepper.linear.apply_physical(g.data)
    nonlinear = stepper.calK(g.data, g.data)
    eta_weight = japanese(spec.eta)[:, None] ** (2.0 * params.r)
    if kind == "M":
        weight = m_delta_grid(t, transport_eta(spec), spec.xi, p)
        measure = spec.d_eta * spec.d_xi
        kinetic = params.c0 * japanese(spec.xi)[None, :] ** params.sigma * (1.0 - params.delta * weight)
        to_coef = fft_xv
        weighted = apply_m_delta(g, p, t)
    elif kind == "G":
        weight = np.broadcast_to(np.asarray(g_delta(t, spec.v, p)), spec.shape)
        measure = spec.d_eta * spec.dv
        kinetic = params.c0 * japanese(spec.v)[None, :] ** params.sigma * (1.0 - params.delta * weight)
        to_coef = fft_x
        weighted = g.with_data(g.data * weight)
    else:
        raise ParameterError(f"unknown audit weight '{kind}'")
    g_coef = weight * to_coef(g.data, spec)
    density = eta_weight * measure * np.abs(g_coef) ** 2
    energy = float(np.sum(density))
    gain = float(np.sum(kinetic * density))
    linear = float(np.sum(eta_weight * measure * np.real(np.conj(weight * to_coef(lin, spec)) * g_coef)))
    nonlin = float(np.sum(eta_weight * measure * np.real(np.conj(weight * to_coef(nonlinear, spec)) * g_coef)))
    triple = triple_norm_r0(weighted, params.r, cfg.q, cfg.cs) ** 2
    return energy, gain, linear, nonlin, triple


def energy_audit(
    traj: Trajectory,
    cfg: SolverConfig,
    kind: Literal["M", "G"] = "M",
    max_spacing: float = 0.1,
) -> AuditReport:
    """
    Fit (c1, C̃1) and check d/dt E + c1|||W g|||²_{(r,0)} ≤ C̃1 E along a trajectory,
    with E = ||W g||²_{H^r} for the weight W = M_δ or G_δ.

    The constants are fitted on the even-indexed snapshots and the inequality is
    scored on the odd-indexed ones. c1 is half the median coercivity ratio
    (ℒ-term over triple norm). C̃1 is the largest fitted growth rate plus half the
    largest second difference of the fitted growth series, which bounds how far a
    smooth rate can rise between two fitted samples. The margin series covers all
    snapshots; the term-by-term identity residual is reported.

    Raises:
        AuditError: Fewer than five snapshots, or non-uniform / too coarse spacing
    """
    times = np.asarray(traj.times, dtype=np.float64)
    if times.size < 5:
        raise AuditError(f"energy audit needs at least 5 snapshots, got {times.size}")
    spacing = np.diff(times)
    if not np.allclose(spacing, spacing[0], rtol=1e-6):
        raise AuditError("energy audit needs uniformly spaced snapshots")
    if spacing[0] > max_spacing:
        raise AuditError(f"snapshot spacing {spacing[0]:.3g} exceeds {max_spacing:.3g}")
    with logfire.span(f"energy audit kind={kind} over {times.size} snapshots"):
        terms = np.array([_energy_terms(g, float(t), cfg, kind) for t, g in zip(times, traj.fields)])
    energy, gain, linear, nonlin, triple = terms.T
    derivative = np.gradient(energy, times, edge_order=2)
    scale = max(float(np.max(np.abs(terms))), TINY)
    if float(np.max(np.abs(energy))) == 0.0:
        zeros = [0.0] * times.size
        return AuditReport(
            kind=kind, c1=0.0, c1_tilde=0.0, times=times.tolist(), margins=zeros,
            fraction_nonneg=1.0, gronwall_ok=True, residual=0.0, passed=True, details={"zero": True},
        )
    fitted = np.zeros(times.size, dtype=bool)
    fitted[::2] = True
    coercive = fitted & (triple > 1e-14 * scale)
    c1 = 0.5 * float(np.median(linear[coercive] / triple[coercive])) if np.any(coercive) else 0.0
    growth = (derivative + c1 * triple) / np.maximum(energy, TINY)
    fit_growth = growth[fitted]
    curvature = float(np.max(np.abs(np.diff(fit_growth, 2)))) if fit_growth.size >= 3 else 0.0
    c1_tilde = max(float(np.max(fit_growth)) + 0.5 * curvature, 0.0)
    margins = c1_tilde * energy - derivative - c1 * triple
    fraction = float(np.mean(margins[~fitted] >= -1e-12 * scale))
    residual = np.abs(0.5 * derivative - (gain - linear + nonlin)) / np.maximum(np.abs(derivative) + np.abs(linear), TINY)
    damped = np.array(
        [np.trapezoid(np.exp(c1_tilde * (t - times[: i + 1])) * triple[: i + 1], times[: i + 1]) for i, t in enumerate(times)]
    )
    gronwall_ok = bool(np.all(energy + c1 * damped <= np.exp(c1_tilde * times) * energy[0] * (1.0 + 1e-2) + 1e-14 * scale))
    passed = fraction >= 0.95 and c1 > 0.0
    if not passed:
        logfire.warning(f"energy audit {kind}: margin nonnegative on {fraction:.1%} of held-out snapshots, c1={c1:.3g}")
    else:
        logfire.info(f"energy audit {kind}: c1={c1:.3g}, C1~={c1_tilde:.3g}, {fraction:.1%} nonnegative")
    return AuditReport(
        kind=kind,
        c1=c1,
        c1_tilde=c1_tilde,
        times=times.tolist(),
        margins=margins.tolist(),
        fraction_nonneg=fraction,
        gronwall_ok=gronwall_ok,
        residual=float(np.max(residual)),
        passed=passed,
        details={
            "energy": energy.tolist(),
            "linear": linear.tolist(),
            "nonlinear": nonlin.tolist(),
            "kinetic": gain.tolist(),
            "triple": triple.tolist(),
            "held_out": np.flatnonzero(~fitted).tolist(),
            "c0": cfg.multiplier.c0,
            "delta": cfg.multiplier.delta,
        },
    )


def select_c0(
    traj: Trajectory,
    cfg: SolverConfig,
    kind: Literal["M", "G"] = "M",
    start: float = 0.5,
    halvings: int = 10,
) -> tuple[float, AuditReport]:
    """
    Largest c0 = start / 2^k whose energy audit passes on the trajectory.

    The dynamics do not depend on c0, only the audited weight does.

    Raises:
        AuditError: No c0 down to start / 2^halvings passes
    """
    for k in range(halvings + 1):
        c0 = start / 2**k
        report = energy_audit(traj, cfg.with_c0(c0), kind)
        if report.passed:
            logfire.info(f"selected c0={c0:.4g} after {k} halvings")
            return c0, report
    raise AuditError(f"energy audit fails for every c0 down to {start / 2**halvings:.3g}")
