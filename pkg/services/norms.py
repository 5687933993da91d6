"""
Norms of perturbations and smoothing-radius fits.

All norms are box-normalized discrete surrogates: integrals become Riemann sums
on the grid (or Plancherel sums on the dual grid), with the box held fixed in any
comparison.
"""

import math
from functools import lru_cache
from typing import Literal, Optional, Sequence

import logfire
import numpy as np
from pydantic import BaseModel, ConfigDict

from schemas.report_schema import FitReport, NormReport
from services.collision import CollisionQuadrature, CrossSection, QuadratureConfig, build_quadrature
from services.errors import FitError, ParameterError
from services.grid import GridSpec, PhaseField, SpectralField, fft_x, fft_xv, ifft_x, interpolation_matrix, inverse
from services.multiplier import PsiEvaluator, g_delta, japanese, m_delta_grid

EPS = float(np.finfo(np.float64).eps)


def _eta_weight(spec: GridSpec, r: float) -> np.ndarray:
    return japanese(spec.eta)[:, None] ** r


def norm_hr_l2(g: PhaseField, r: float) -> float:
    """||⟨η⟩^r ĝ||_{L²} computed in the mixed (η, v) representation."""
    if r < 0:
        raise ParameterError(f"Sobolev index must be nonnegative, got {r}")
    spec = g.spec
    mixed = fft_x(g.data, spec) * _eta_weight(spec, r)
    return math.sqrt(spec.d_eta * spec.dv * float(np.sum(np.abs(mixed) ** 2)))


def norm_sobolev_hs(g: PhaseField, r: float, s: float) -> float:
    """||g||_{H^r_x(H^s_v)}."""
    spec = g.spec
    coef = fft_xv(g.data, spec) * _eta_weight(spec, r) * japanese(spec.xi)[None, :] ** s
    return math.sqrt(spec.d_eta * spec.d_xi * float(np.sum(np.abs(coef) ** 2)))


def norm_vweight(g: PhaseField, r: float, s: float) -> float:
    """||⟨v⟩^s g||_{H^r_x(L²_v)}."""
    return norm_hr_l2(g.with_data(g.data * japanese(g.spec.v)[None, :] ** s), r)


def weighted_norm_m(g: PhaseField, p: PsiEvaluator, t: float) -> float:
    """||M_δ(t) g||_{H^r_x(L²_v)} with M_δ applied on the full dual grid."""
    spec = g.spec
    weight = m_delta_grid(t, spec.eta, spec.xi, p) * _eta_weight(spec, p.params.r)
    coef = fft_xv(g.data, spec) * weight
    return math.sqrt(spec.d_eta * spec.d_xi * float(np.sum(np.abs(coef) ** 2)))


def weighted_norm_g(g: PhaseField, p: PsiEvaluator, t: float) -> float:
    """||G_δ(t) g||_{H^r_x(L²_v)} with G_δ applied in physical v."""
    weighted = g.data * np.asarray(g_delta(t, g.spec.v, p))[None, :]
    return norm_hr_l2(g.with_data(weighted), p.params.r)


def apply_m_delta(g: PhaseField, p: PsiEvaluator, t: float) -> PhaseField:
    """Physical field of M_δ(t) ĝ (real part)."""
    spec = g.spec
    coef = fft_xv(g.data, spec) * m_delta_grid(t, spec.eta, spec.xi, p)
    return inverse(SpectralField(spec=spec, coef=coef))


def bessel_x(g: np.ndarray, spec: GridSpec, r: float) -> np.ndarray:
    """⟨D_x⟩^r g on raw samples."""
    return ifft_x(fft_x(g, spec) * _eta_weight(spec, r), spec).real


# ================================================
# Anisotropic triple norm
# ================================================
class TripleNormForm(BaseModel):
    """|||g|||² = gᵀ Q g for v-samples g."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: GridSpec
    matrix: np.ndarray
    gain_part: np.ndarray  # first term: β μ_*(g′ − g)²
    moment_part: np.ndarray  # diagonal of the second term: β g_*²(√μ′ − √μ)²

    def value(self, g: np.ndarray) -> float:
        return math.sqrt(max(float(g @ self.matrix @ g), 0.0))

    def batch_squares(self, g: np.ndarray) -> np.ndarray:
        return np.einsum("xi,ij,xj->x", g, self.matrix, g)


def _moment_kernel(v_star: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """∫(√μ(v cosθ − v* sinθ) − √μ(v))² dv in closed form, shape (θ, v*)."""
    c = np.cos(theta)[:, None]
    s = np.sin(theta)[:, None]
    spread = 1.0 + c * c
    return 1.0 / c + 1.0 - 2.0 * np.sqrt(2.0 / spread) * np.exp(-np.square(v_star)[None, :] * s * s / (4.0 * spread))


@lru_cache(maxsize=8)
def triple_norm_form(spec: GridSpec, config: QuadratureConfig, cs: CrossSection) -> TripleNormForm:
    q = build_quadrature(config)
    bw = q.beta_weights(cs)
    v = spec.v
    v_star = math.sqrt(2.0) * q.hermite_nodes
    star_weight = spec.dv * q.hermite_weights / math.sqrt(math.pi)
    gain = np.zeros((spec.Nv, spec.Nv))
    identity = np.eye(spec.Nv)
    with logfire.span(f"building triple-norm form Nv={spec.Nv} nodes={q.theta.size}"):
        for theta, weight in zip(q.theta, bw):
            v_prime = np.subtract.outer(v * math.cos(theta), v_star * math.sin(theta))
            rows = interpolation_matrix(v_prime.ravel(), spec).reshape(spec.Nv, v_star.size, spec.Nv)
            rows = rows - identity[:, None, :]
            scaled = rows * np.sqrt(star_weight)[None, :, None]
            flat = scaled.reshape(-1, spec.Nv)
            gain += weight * (flat.T @ flat)
    moment = spec.dv * (bw @ _moment_kernel(v, q.theta))
    matrix = 0.5 * (gain + gain.T) + np.diag(moment)
    return TripleNormForm(spec=spec, matrix=matrix, gain_part=0.5 * (gain + gain.T), moment_part=moment)


def triple_norm(g: np.ndarray, spec: GridSpec, q: CollisionQuadrature, cs: CrossSection) -> float:
    """|||g||| of one v-line."""
    return triple_norm_form(spec, q.config, cs).value(np.asarray(g, dtype=np.float64))


def triple_norm_r0(g: PhaseField, r: float, q: CollisionQuadrature, cs: CrossSection) -> float:
    """(∫|||⟨D_x⟩^r g|||² dx)^{1/2}."""
    spec = g.spec
    form = triple_norm_form(spec, q.config, cs)
    lifted = bessel_x(g.data, spec, r)
    return math.sqrt(max(spec.dx * float(np.sum(form.batch_squares(lifted))), 0.0))


def norm_report(
    g: PhaseField,
    t: float,
    p: PsiEvaluator,
    deltas: Sequence[float],
    q: CollisionQuadrature,
    cs: CrossSection,
) -> NormReport:
    """Every tracked norm of g at time t; weighted columns keyed by repr(δ)."""
    r = p.params.r
    s = cs.s
    return NormReport(
        t=t,
        h_r_l2=norm_hr_l2(g, r),
        triple_r0=triple_norm_r0(g, r, q, cs),
        weighted_m={repr(delta): weighted_norm_m(g, p.with_delta(delta), t) for delta in deltas},
        weighted_g={repr(delta): weighted_norm_g(g, p.with_delta(delta), t) for delta in deltas},
        sobolev_hs=norm_sobolev_hs(g, r, s),
        vweight=norm_vweight(g, r, s),
        triple_m={
            repr(delta): triple_norm_r0(apply_m_delta(g, p.with_delta(delta), t), r, q, cs) for delta in deltas
        },
    )


# ================================================
# Radius fits
# ================================================
Direction = Literal["x", "v", "velocity-decay"]


def _profile(field: SpectralField, direction: Direction, x_index: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(abscissa, |values|, full-array max) for one direction."""
    spec = field.spec
    if direction == "x":
        k = np.arange(spec.Nx // 16, spec.Nx // 4 + 1)
        return spec.eta[k], np.abs(field.coef[k, 0]), float(np.max(np.abs(field.coef)))
    if direction == "v":
        m = np.arange(spec.Nv // 16, spec.Nv // 4 + 1)
        return spec.xi[m], np.abs(field.coef[0, m]), float(np.max(np.abs(field.coef)))
    physical = inverse(field).data
    v = spec.v
    band = (np.abs(v) >= spec.Lv / 8.0) & (np.abs(v) <= spec.Lv / 2.0)
    return v[band], np.abs(physical[x_index, band]), float(np.max(np.abs(physical)))


def fit_gevrey_radius(
    times: Sequence[float],
    fields: Sequence[SpectralField],
    direction: Direction,
    s_tilde: float,
    x_index: Optional[int] = None,
) -> FitReport:
    """
    Fit log|ĝ| ≈ a − ρ(t)·⟨k⟩^{2s̃} per time, then log ρ(t) ≈ log c + p·log t.

    Raises:
        FitError: Fewer than 3 usable modes at a time, fewer than 8 in total, or
            fewer than 3 times with ρ(t) > 0
    """
    if len(times) != len(fields):
        raise FitError(f"{len(times)} times but {len(fields)} fields")
    sigma = 2.0 * s_tilde
    if direction == "velocity-decay" and x_index is None:
        last = inverse(fields[-1]).data
        x_index = int(np.argmax(np.sum(last * last, axis=1)))
    used_times, rates, total_modes = [], [], 0
    for t, field in zip(times, fields):
        if t <= 0:
            continue
        abscissa, magnitude, peak = _profile(field, direction, x_index or 0)
        usable = magnitude > 10.0 * EPS * peak
        if np.count_nonzero(usable) < 3:
            logfire.debug(f"fit {direction}: t={t} has {int(np.count_nonzero(usable))} usable modes, skipped")
            continue
        slope, _ = np.polyfit(japanese(abscissa[usable]) ** sigma, np.log(magnitude[usable]), 1)
        total_modes += int(np.count_nonzero(usable))
        if -slope > 0:
            used_times.append(float(t))
            rates.append(float(-slope))
    if total_modes < 8 or len(rates) < 3:
        raise FitError(
            f"{direction}-fit needs >= 8 modes and >= 3 times with positive rate; "
            f"got {total_modes} modes, {len(rates)} times"
        )
    log_t, log_rate = np.log(used_times), np.log(rates)
    exponent, intercept = np.polyfit(log_t, log_rate, 1)
    predicted = intercept + exponent * log_t
    residual = float(np.sum((log_rate - predicted) ** 2))
    spread = float(np.sum((log_rate - log_rate.mean()) ** 2))
    r2 = 1.0 - residual / spread if spread > 0 else 1.0
    window = {
        "times": [min(used_times), max(used_times)],
        "modes": total_modes,
        "band": {"x": "Nx/16..Nx/4", "v": "Nv/16..Nv/4", "velocity-decay": "Lv/8..Lv/2"}[direction],
    }
    logfire.info(f"fit {direction}: exponent {exponent:.3f}, radius {math.exp(intercept):.4g}, r2 {r2:.4f}")
    return FitReport(
        direction=direction,
        radius_estimate=float(math.exp(intercept)),
        exponent_estimate=float(exponent),
        r2=float(r2),
        window=window,
        rates=rates,
        times=used_times,
    )
