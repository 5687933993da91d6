"""
Non-cutoff Kac collision operator.

Forms implemented:
    K(F, G)       physical-space bilinear operator (oracle, O(Nv³·nθ))
    𝒦(f, g)       μ^{-1/2}K(μ^{1/2}f, μ^{1/2}g), via the Fourier formula below
    𝒯(f, g, ω)    trilinear form with ω = μ^α, α > 1/4
    ℒg            -𝒦(√μ, g) - 𝒦(g, √μ)

In unitary Fourier variables, with u′ = ξ sinθ + u cosθ and ξ′ = ξ cosθ − u sinθ,

    𝒯̂(ξ) = ∫ β(θ) ∫ ω̂(u) [f̂(u′)ĝ(ξ′) − f̂(u)ĝ(ξ)] du dθ

The u-integral uses Gauss–Hermite nodes (ω̂ is Gaussian), the θ-integral a
symmetric geometrically graded Gauss–Legendre rule on ε ≤ |θ| ≤ π/2. Gain and
loss share the θ-rule and are recombined through cancellation-free phase
differences, so the grazing singularity cancels at each node pair.
"""

import math
from functools import lru_cache
from typing import Callable, Sequence

import logfire
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import roots_hermite, roots_legendre

from schemas.report_schema import ConvergenceReport, LemmaReport
from services.errors import GridError, ParameterError, QuadratureError
from services.grid import SQRT_2PI, GridSpec, PhaseField, fft_v, ifft_v, interpolation_matrix, offgrid_matrix
from services.maxwellian import mu_power, mu_power_hat


# ================================================
# Cross section and quadrature
# ================================================
class CrossSection(BaseModel):
    """β(θ) = C0 |cosθ| / |sinθ|^{1+2s}."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(gt=0.0, lt=1.0)
    C0: float = Field(default=1.0, gt=0.0)

    def beta(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        return self.C0 * np.abs(np.cos(theta)) / np.abs(np.sin(theta)) ** (1.0 + 2.0 * self.s)


class QuadratureConfig(BaseModel):
    """Resolution of the (θ, u) rule."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    eps: float = Field(default=1e-4, gt=0.0, lt=0.5)
    panels: int = Field(default=24, ge=1)
    panel_ratio: float = Field(default=1.5, ge=1.0)
    order: int = Field(default=8, ge=2)
    hermite_order: int = Field(default=40, ge=4)

    def refine(self) -> "QuadratureConfig":
        """Halve ε, double the panels (same total grading), +50% Hermite nodes."""
        return QuadratureConfig(
            eps=0.5 * self.eps,
            panels=2 * self.panels,
            panel_ratio=math.sqrt(self.panel_ratio),
            order=self.order,
            hermite_order=int(math.ceil(1.5 * self.hermite_order)),
        )


def graded_panels(lo: float, hi: float, panels: int, ratio: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss–Legendre on [lo, hi] with widths growing geometrically by `ratio`."""
    if not 0.0 < lo < hi:
        raise QuadratureError(f"invalid panel range [{lo}, {hi}]")
    if ratio == 1.0:
        widths = np.full(panels, (hi - lo) / panels)
    else:
        first = (hi - lo) * (ratio - 1.0) / (ratio**panels - 1.0)
        widths = first * ratio ** np.arange(panels)
    edges = lo + np.concatenate([[0.0], np.cumsum(widths)])
    edges[-1] = hi
    nodes, weights = roots_legendre(order)
    left, width = edges[:-1, None], np.diff(edges)[:, None]
    theta = (left + 0.5 * width * (1.0 + nodes[None, :])).ravel()
    weight = (0.5 * width * weights[None, :]).ravel()
    return theta, weight


class CollisionQuadrature(BaseModel):
    """Symmetric θ-rule on ε ≤ |θ| ≤ π/2 and Gauss–Hermite nodes for e^{-x²}."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    config: QuadratureConfig
    theta: np.ndarray
    weights: np.ndarray
    hermite_nodes: np.ndarray
    hermite_weights: np.ndarray

    @property
    def eps(self) -> float:
        return self.config.eps

    @property
    def hermite_order(self) -> int:
        return self.config.hermite_order

    def beta_weights(self, cs: CrossSection) -> np.ndarray:
        return self.weights * cs.beta(self.theta)

    def refine(self) -> "CollisionQuadrature":
        return build_quadrature(self.config.refine())


@lru_cache(maxsize=16)
def build_quadrature(config: QuadratureConfig) -> CollisionQuadrature:
    positive, weight = graded_panels(config.eps, 0.5 * math.pi, config.panels, config.panel_ratio, config.order)
    hermite_nodes, hermite_weights = roots_hermite(config.hermite_order)
    return CollisionQuadrature(
        config=config,
        theta=np.concatenate([-positive[::-1], positive]),
        weights=np.concatenate([weight[::-1], weight]),
        hermite_nodes=hermite_nodes,
        hermite_weights=hermite_weights,
    )


def hermite_rule(q: CollisionQuadrature, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes u_k and weights c_k with Σ c_k F(u_k) ≈ ∫ FT(μ^α)(u) F(u) du."""
    if alpha <= 0.25:
        raise ParameterError(f"weight exponent must exceed 1/4, got {alpha}")
    nodes = math.sqrt(2.0 * alpha) * q.hermite_nodes
    weights = math.sqrt(2.0) * (2.0 * math.pi) ** (-0.5 * alpha) * q.hermite_weights
    return nodes, weights


def linearized_eigenvalue(q: CollisionQuadrature, cs: CrossSection) -> float:
    """λ₁ = ∫β(θ)(1 − cosθ)dθ, eigenvalue of ℒ on v√μ under the same θ-rule."""
    return float(np.sum(q.beta_weights(cs) * 2.0 * np.sin(0.5 * q.theta) ** 2))


# ================================================
# Phase factors
# ================================================
def _phase(k: np.ndarray, spec: GridSpec) -> np.ndarray:
    """E(k)_j = (dv/√2π) e^{-ik v_j}, broadcast over a trailing v axis."""
    return np.exp(-1j * k[..., None] * spec.v) * (spec.dv / SQRT_2PI)


def _phase_step(dk: np.ndarray, spec: GridSpec) -> np.ndarray:
    """e^{-i dk v_j} − 1 without cancellation."""
    angle = dk[..., None] * spec.v
    return -2.0 * np.sin(0.5 * angle) ** 2 - 1j * np.sin(angle)


def _rotation_steps(xi: float, theta: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(u′ − u, ξ′ − ξ) on the (θ, u) grid."""
    sin_t = np.sin(theta)[:, None]
    versine = 2.0 * np.sin(0.5 * theta)[:, None] ** 2
    du = xi * sin_t - versine * u[None, :]
    dxi = -versine * xi - u[None, :] * sin_t
    return du, dxi


# ================================================
# Operators
# ================================================
class CollisionResult(BaseModel):
    """Spectral output with its refinement error estimate."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    error_bound: float
    converged: bool


class TrilinearTensor(BaseModel):
    """T[m, j, l]: physical samples f_j, g_l -> spectral 𝒯̂(ξ_m)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: GridSpec
    alpha: float
    tensor: np.ndarray

    def apply(self, f_phys: np.ndarray, g_phys: np.ndarray) -> np.ndarray:
        """Batched over leading axes: (..., Nv) x (..., Nv) -> (..., Nv) spectral."""
        partial = np.einsum("mjl,...l->...mj", self.tensor, g_phys, optimize=True)
        return np.einsum("...mj,...j->...m", partial, f_phys, optimize=True)


@lru_cache(maxsize=8)
def trilinear_tensor(spec: GridSpec, config: QuadratureConfig, cs: CrossSection, alpha: float) -> TrilinearTensor:
    q = build_quadrature(config)
    u, c_u = hermite_rule(q, alpha)
    bw = q.beta_weights(cs)
    weight = bw[:, None] * c_u[None, :]
    e_u = _phase(u, spec)
    tensor = np.empty((spec.Nv, spec.Nv, spec.Nv), dtype=np.complex128)
    with logfire.span(f"building collision tensor Nv={spec.Nv} alpha={alpha} nodes={q.theta.size}x{u.size}"):
        for m, xi in enumerate(spec.xi):
            du, dxi = _rotation_steps(float(xi), q.theta, u)
            delta_a = e_u[None, :, :] * _phase_step(du, spec)
            e_xi_prime = _phase(xi + dxi, spec)
            delta_b = _phase(np.asarray(xi), spec)[None, None, :] * _phase_step(dxi, spec)
            weighted_a = (weight[..., None] * delta_a).reshape(-1, spec.Nv)
            gain = weighted_a.T @ e_xi_prime.reshape(-1, spec.Nv)
            shift = e_u.T @ np.einsum("ak,akl->kl", weight, delta_b)
            tensor[m] = gain + shift
    return TrilinearTensor(spec=spec, alpha=alpha, tensor=tensor)


class LinearizedOperator(BaseModel):
    """ℒ as matrices: `spectral` maps v-samples to ξ-values, `physical` is real v -> v."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: GridSpec
    spectral: np.ndarray
    physical: np.ndarray
    eigenvalue: float

    def apply_physical(self, g: np.ndarray) -> np.ndarray:
        return g @ self.physical.T


@lru_cache(maxsize=8)
def linearized_operator(spec: GridSpec, config: QuadratureConfig, cs: CrossSection) -> LinearizedOperator:
    q = build_quadrature(config)
    u, c_u = hermite_rule(q, 0.5)
    weight = q.beta_weights(cs)[:, None] * c_u[None, :]
    root_hat_u = mu_power_hat(u, 0.5)
    e_u = _phase(u, spec)
    spectral = np.empty((spec.Nv, spec.Nv), dtype=np.complex128)
    for m, xi in enumerate(spec.xi):
        du, dxi = _rotation_steps(float(xi), q.theta, u)
        xi_prime = xi + dxi
        root_hat_up = root_hat_u[None, :] * np.exp(-du * (2.0 * u[None, :] + du))
        root_step_u = root_hat_u[None, :] * np.expm1(-du * (2.0 * u[None, :] + du))
        root_hat_xi = float(mu_power_hat(np.asarray(xi), 0.5))
        root_step_xi = root_hat_xi * np.expm1(-dxi * (2.0 * xi + dxi))
        e_xi = _phase(np.asarray(xi), spec)
        delta_b = e_xi[None, None, :] * _phase_step(dxi, spec)
        delta_a = e_u[None, :, :] * _phase_step(du, spec)
        frozen_first = np.einsum("ak,akl->l", weight * root_hat_up, delta_b) + e_xi * np.sum(weight * root_step_u)
        frozen_second = np.einsum("ak,akj->j", weight * mu_power_hat(xi_prime, 0.5), delta_a) + np.einsum(
            "ak,kj->j", weight * root_step_xi, e_u
        )
        spectral[m] = -(frozen_first + frozen_second)
    physical = ifft_v(spectral.T, spec).T.real
    return LinearizedOperator(spec=spec, spectral=spectral, physical=physical, eigenvalue=linearized_eigenvalue(q, cs))


def _line_samples(line: np.ndarray, spec: GridSpec) -> np.ndarray:
    line = np.asarray(line, dtype=np.complex128)
    if line.shape[-1] != spec.Nv:
        raise GridError(f"spectral line of length {line.shape[-1]} on a grid with Nv={spec.Nv}")
    return ifft_v(line, spec)


def apply_T_spectral(
    fhat: np.ndarray,
    ghat: np.ndarray,
    alpha: float,
    spec: GridSpec,
    q: CollisionQuadrature,
    cs: CrossSection,
) -> np.ndarray:
    """𝒯̂(f, g, μ^α) on the ξ-grid from spectral lines (FFT order)."""
    tensor = trilinear_tensor(spec, q.config, cs, float(alpha))
    return tensor.apply(_line_samples(fhat, spec), _line_samples(ghat, spec))


def apply_calK_spectral(
    fhat: np.ndarray,
    ghat: np.ndarray,
    spec: GridSpec,
    q: CollisionQuadrature,
    cs: CrossSection,
    with_error: bool = False,
    tol: float = 1e-5,
):
    """
    𝒦̂(f, g) on the ξ-grid.

    With `with_error`, the operator is re-evaluated on the refined quadrature and a
    CollisionResult carrying the relative change is returned instead of the array.
    """
    values = apply_T_spectral(fhat, ghat, 0.5, spec, q, cs)
    if not with_error:
        return values
    refined = apply_T_spectral(fhat, ghat, 0.5, spec, q.refine(), cs)
    scale = max(float(np.linalg.norm(refined)), np.finfo(np.float64).tiny)
    error = float(np.linalg.norm(refined - values)) / scale
    if error > tol:
        logfire.warning(f"collision quadrature not converged: relative refinement change {error:.2e} > {tol:.0e}")
    return CollisionResult(values=values, error_bound=error, converged=error <= tol)


def apply_L(ghat: np.ndarray, spec: GridSpec, q: CollisionQuadrature, cs: CrossSection) -> np.ndarray:
    """ℒ̂g on the ξ-grid from a spectral line."""
    operator = linearized_operator(spec, q.config, cs)
    return _line_samples(ghat, spec) @ operator.spectral.T


def apply_calK_full(f: PhaseField, g: PhaseField, q: CollisionQuadrature, cs: CrossSection) -> PhaseField:
    """𝒦(f, g) slice by slice in x."""
    if f.spec != g.spec:
        raise GridError(f"grid mismatch: {f.spec} vs {g.spec}")
    spec = f.spec
    tensor = trilinear_tensor(spec, q.config, cs, 0.5)
    values = tensor.apply(f.data.astype(np.complex128), g.data.astype(np.complex128))
    return PhaseField(spec=spec, data=ifft_v(values, spec).real)


def calK_physical(frozen: np.ndarray, g: np.ndarray, spec: GridSpec, q: CollisionQuadrature, cs: CrossSection) -> np.ndarray:
    """𝒦(frozen, g) on raw (Nx, Nv) sample arrays."""
    tensor = trilinear_tensor(spec, q.config, cs, 0.5)
    return ifft_v(tensor.apply(frozen.astype(np.complex128), g.astype(np.complex128)), spec).real


# ================================================
# Physical-space oracles
# ================================================
def _oracle(
    f: np.ndarray,
    g: np.ndarray,
    weight: np.ndarray,
    spec: GridSpec,
    q: CollisionQuadrature,
    cs: CrossSection,
) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.shape != (spec.Nv,) or g.shape != (spec.Nv,):
        raise GridError(f"oracle expects v-lines of length {spec.Nv}")
    v = spec.v
    loss = np.outer(g, f)
    out = np.zeros(spec.Nv)
    for theta, bw in zip(q.theta, q.beta_weights(cs)):
        c, s = math.cos(theta), math.sin(theta)
        v_prime = np.subtract.outer(v * c, v * s)
        v_star_prime = np.add.outer(v * s, v * c)
        f_star = (interpolation_matrix(v_star_prime.ravel(), spec) @ f).reshape(v_prime.shape)
        g_prime = (interpolation_matrix(v_prime.ravel(), spec) @ g).reshape(v_prime.shape)
        out += bw * ((f_star * g_prime - loss) @ weight)
    return out * spec.dv


def apply_K_oracle(f: np.ndarray, g: np.ndarray, spec: GridSpec, q: CollisionQuadrature, cs: CrossSection) -> np.ndarray:
    """K(f, g)(v_i) = ∫∫β{f(v*′)g(v′) − f(v*)g(v)}dθdv* by direct summation."""
    return _oracle(f, g, np.ones(spec.Nv), spec, q, cs)


def apply_T_oracle(
    f: np.ndarray, g: np.ndarray, alpha: float, spec: GridSpec, q: CollisionQuadrature, cs: CrossSection
) -> np.ndarray:
    """𝒯(f, g, μ^α)(v_i) in physical space; α = 1/2 gives 𝒦."""
    return _oracle(f, g, mu_power(spec.v, alpha), spec, q, cs)


# ================================================
# Convergence and structural checks
# ================================================
def convergence_report(
    op: str,
    inputs: Sequence[np.ndarray],
    spec: GridSpec,
    q: CollisionQuadrature,
    cs: CrossSection,
    tol: float = 1e-5,
    alpha: float = 0.5,
) -> ConvergenceReport:
    """
    Relative change of an operator output under one quadrature refinement.

    `op` is one of "calK", "T" or "L"; inputs are spectral lines.
    """
    if op == "calK":
        base = apply_calK_spectral(inputs[0], inputs[1], spec, q, cs)
        fine = apply_calK_spectral(inputs[0], inputs[1], spec, q.refine(), cs)
    elif op == "T":
        base = apply_T_spectral(inputs[0], inputs[1], alpha, spec, q, cs)
        fine = apply_T_spectral(inputs[0], inputs[1], alpha, spec, q.refine(), cs)
    elif op == "L":
        base = apply_L(inputs[0], spec, q, cs)
        fine = apply_L(inputs[0], spec, q.refine(), cs)
    else:
        raise ParameterError(f"unknown collision operator '{op}'")
    scale = max(float(np.linalg.norm(fine)), np.finfo(np.float64).tiny)
    delta = float(np.linalg.norm(fine - base)) / scale
    return ConvergenceReport(op=op, eps=q.eps, delta_refine=delta, tol=tol, passed=delta <= tol)


def check_cancellation(
    g: np.ndarray,
    h: np.ndarray,
    spec: GridSpec,
    q: CollisionQuadrature,
    tol: float = 1e-8,
    n_u: int = 4,
    min_cos: float = 0.2,
) -> LemmaReport:
    """
    ∫[Φ(ξ) − Φ(ξcosθ − u sinθ)]dξ = (1 − 1/cosθ)∫Φ(ξ)dξ with Φ = ĝ·conj(ĥ).

    Φ is the band-limited product on |ξ| < ξ_N; integrals are Riemann sums with
    spacing dξ/8 over the range covering its support.
    """
    xi_n = math.pi / spec.dv
    step = spec.d_xi / 8.0
    base = np.arange(-xi_n, xi_n, step)
    g_samples = np.asarray(g, dtype=np.float64)
    h_samples = np.asarray(h, dtype=np.float64)

    def phi(points: np.ndarray) -> np.ndarray:
        rows = offgrid_matrix(points, spec)
        values = (rows @ g_samples) * np.conj(rows @ h_samples)
        return np.where(np.abs(points) < xi_n, values, 0.0)

    total = step * np.sum(phi(base))
    scale = step * float(np.sum(np.abs(phi(base))))
    order = np.argsort(np.abs(q.hermite_nodes))[:n_u]
    worst = 0.0
    checked = 0
    for theta in q.theta:
        c, s = math.cos(theta), math.sin(theta)
        if c < min_cos:
            continue
        for u in q.hermite_nodes[order]:
            lo, hi = (u * s - xi_n) / c, (u * s + xi_n) / c
            grid = np.arange(math.floor(lo / step) - 1, math.ceil(hi / step) + 2) * step
            shifted = step * np.sum(phi(grid * c - u * s))
            lhs = total - shifted
            rhs = (1.0 - 1.0 / c) * total
            worst = max(worst, abs(lhs - rhs) / max(scale, np.finfo(np.float64).tiny))
            checked += 1
    return LemmaReport(
        lemma="cancellation",
        n_samples=checked,
        sup_ratio=worst,
        params={"min_cos": min_cos},
        passed=bool(worst <= tol),
        details={"tol": tol},
    )


def a1_type_integrand(
    f: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    multiplier: Callable[[np.ndarray], np.ndarray],
    spec: GridSpec,
    q: CollisionQuadrature,
    cs: CrossSection,
    even_part: bool = False,
) -> complex:
    """
    Σ_θ β Σ_u ω̂(u) f̂(u′) ĝ(ξ′) [M(ξ) − M(ξ′)] conj ĥ(ξ) dξ, summed over the ξ-grid.

    With `even_part`, f̂(u′) is replaced by (f̂(u′) + f̂(−u′))/2.
    """
    u, c_u = hermite_rule(q, 0.5)
    bw = q.beta_weights(cs)
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    h_hat = fft_v(np.asarray(h, dtype=np.float64), spec)
    total = 0.0 + 0.0j
    for m, xi in enumerate(spec.xi):
        du, dxi = _rotation_steps(float(xi), q.theta, u)
        u_prime = u[None, :] + du
        xi_prime = xi + dxi
        f_hat = offgrid_matrix(u_prime, spec) @ f
        if even_part:
            f_hat = 0.5 * (f_hat + offgrid_matrix(-u_prime, spec) @ f)
        g_hat = offgrid_matrix(xi_prime, spec) @ g
        jump = multiplier(np.asarray(xi)) - multiplier(xi_prime)
        total += np.conj(h_hat[m]) * np.sum(bw[:, None] * c_u[None, :] * f_hat * g_hat * jump)
    return total * spec.d_xi


def check_even_odd(
    f: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    multiplier: Callable[[np.ndarray], np.ndarray],
    spec: GridSpec,
    q: CollisionQuadrature,
    cs: CrossSection,
    tol: float = 1e-10,
) -> LemmaReport:
    """Replacing f̂ by its even part leaves the θ-symmetrized A₁-type value unchanged."""
    full = a1_type_integrand(f, g, h, multiplier, spec, q, cs)
    even = a1_type_integrand(f, g, h, multiplier, spec, q, cs, even_part=True)
    scale = max(abs(full), abs(even), np.finfo(np.float64).tiny)
    deviation = abs(full - even) / scale
    return LemmaReport(
        lemma="even_odd",
        n_samples=int(spec.Nv * q.theta.size * q.hermite_order),
        sup_ratio=float(deviation),
        params={"s": cs.s},
        passed=bool(deviation <= tol),
        details={"full": abs(full), "even": abs(even)},
    )


def _tail_values(
    f: np.ndarray, g: np.ndarray, eps: float, eps_lo: float, spec: GridSpec, cs: CrossSection, symmetric: bool
) -> np.ndarray:
    theta, weight = graded_panels(eps_lo, eps, 40, (eps / eps_lo) ** (1.0 / 40.0), 8)
    if symmetric:
        theta = np.concatenate([-theta, theta])
        weight = np.concatenate([weight, weight])
    bw = weight * cs.beta(theta)
    hermite_nodes, hermite_weights = roots_hermite(40)
    u = hermite_nodes
    c_u = math.sqrt(2.0) * (2.0 * math.pi) ** (-0.25) * hermite_weights
    e_u = _phase(u, spec)
    f_u = e_u @ f
    out = np.empty(spec.Nv, dtype=np.complex128)
    for m, xi in enumerate(spec.xi):
        du, dxi = _rotation_steps(float(xi), theta, u)
        f_step = (e_u[None, :, :] * _phase_step(du, spec)) @ f
        g_prime = _phase(xi + dxi, spec) @ g
        g_step = (_phase(np.asarray(xi), spec)[None, None, :] * _phase_step(dxi, spec)) @ g
        out[m] = np.sum(bw[:, None] * c_u[None, :] * (f_step * g_prime + f_u[None, :] * g_step))
    return out


def grazing_tail_exponent(
    f: np.ndarray,
    g: np.ndarray,
    spec: GridSpec,
    cs: CrossSection,
    eps_list: Sequence[float] = (3e-2, 1e-2, 3e-3, 1e-3, 3e-4),
    tolerance: float = 0.10,
) -> LemmaReport:
    """
    Log–log slope of the ε-cutoff tail of 𝒦̂(f, g).

    For s < 1/2 the tail is taken one-sided (θ > 0), for s ≥ 1/2 symmetrized; the
    expected exponents are 1 − 2s and 2 − 2s.
    """
    eps_values = np.asarray(sorted(eps_list), dtype=np.float64)
    if eps_values.size < 3:
        raise ParameterError("grazing tail fit needs at least three cutoffs")
    symmetric = cs.s >= 0.5
    expected = (2.0 if symmetric else 1.0) - 2.0 * cs.s
    eps_lo = 1e-6 * float(eps_values[0])
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    sizes = np.array(
        [np.linalg.norm(_tail_values(f, g, float(eps), eps_lo, spec, cs, symmetric)) for eps in eps_values]
    )
    slope, _ = np.polyfit(np.log(eps_values), np.log(sizes), 1)
    relative = abs(slope - expected) / expected
    logfire.info(f"grazing tail s={cs.s}: slope {slope:.3f}, expected {expected:.3f}")
    return LemmaReport(
        lemma="grazing_tail",
        n_samples=int(eps_values.size),
        sup_ratio=float(slope),
        params={"s": cs.s, "expected": expected},
        passed=bool(relative <= tolerance),
        details={"eps": eps_values.tolist(), "tail": sizes.tolist(), "relative_error": relative},
    )

