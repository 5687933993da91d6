"""
Exponential Fourier multipliers and their sampled calculus.

    Ψ_s(t, η, ξ) = c0 ∫₀ᵗ ⟨ξ + ρη⟩^{2s̃} dρ
    M_δ = e^Ψ / (1 + δ e^Ψ) = 1 / (δ + e^{-Ψ})
    G_δ(t, v) = 1 / (δ + e^{-c0 t ⟨v⟩^{2s̃}})

The lemma checkers below sample these weights and return LemmaReport records.
"""

import math
from functools import lru_cache
from typing import Optional, Sequence

import logfire
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import roots_legendre

from schemas.report_schema import LemmaReport
from services.errors import ParameterError

EPS = float(np.finfo(np.float64).eps)
DEFAULT_DELTAS: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
_CHUNK = 4096
_ELLIPSE_MIN = 1.8
_PANEL_ORDER = 16


# ================================================
# Parameters
# ================================================
class MultiplierParams(BaseModel):
    """Parameters of Ψ_s, M_δ and G_δ."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(gt=0.0, lt=1.0)
    c0: float = Field(default=0.5, gt=0.0)
    delta: float = Field(default=1e-2, gt=0.0, lt=1.0)
    r: float = Field(default=1.0, gt=0.5)
    s_tilde: float = 0.0

    @model_validator(mode="before")
    @classmethod
    def _derive_s_tilde(cls, data):
        if isinstance(data, dict) and "s" in data:
            data = {**data, "s_tilde": min(float(data["s"]), 0.5)}
        return data

    @property
    def sigma(self) -> float:
        """Exponent 2s̃ of the Japanese bracket."""
        return 2.0 * self.s_tilde

    def with_delta(self, delta: float) -> "MultiplierParams":
        return MultiplierParams(s=self.s, c0=self.c0, delta=delta, r=self.r)

    def with_c0(self, c0: float) -> "MultiplierParams":
        return MultiplierParams(s=self.s, c0=c0, delta=self.delta, r=self.r)


class PsiEvaluator(BaseModel):
    """Evaluator of Ψ_s for fixed parameters."""

    model_config = ConfigDict(frozen=True)

    params: MultiplierParams
    rho_quadrature_order: int = Field(default=32, ge=4)

    def with_delta(self, delta: float) -> "PsiEvaluator":
        return PsiEvaluator(params=self.params.with_delta(delta), rho_quadrature_order=self.rho_quadrature_order)


def japanese(x: np.ndarray) -> np.ndarray:
    """⟨x⟩ = (1 + x²)^{1/2}."""
    return np.sqrt(1.0 + np.square(x))


@lru_cache(maxsize=16)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(order)
    return nodes, weights


# ================================================
# ρ-integral
# ================================================
def _ellipse_parameter(c: np.ndarray, h: np.ndarray) -> np.ndarray:
    # Bernstein ellipse through the branch points ξ + ρη = ±i, in [0, t] coordinates.
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        w = (1j - c) / np.where(h == 0.0, 1.0, h)
        root = np.sqrt(w * w - 1.0)
        radius = np.maximum(np.abs(w + root), np.abs(w - root))
    return np.where(h == 0.0, np.inf, radius)


def _direct_rule(t, eta, xi, exponent, order):
    nodes, weights = _legendre(order)
    rho = 0.5 * t[:, None] * (1.0 + nodes[None, :])
    z = xi[:, None] + rho * eta[:, None]
    return 0.5 * t * ((1.0 + z * z) ** (0.5 * exponent) @ weights)


def _sinh_rule(t, eta, xi, exponent):
    # ξ + ρη = sinh u turns the integrand into cosh^{exponent+1}(u)/η.
    nodes, weights = _legendre(_PANEL_ORDER)
    u0 = np.arcsinh(xi)
    span = np.arcsinh(xi + t * eta) - u0
    panels = max(1, int(math.ceil(float(np.max(np.abs(span))) / 2.0)))
    frac = (np.arange(panels)[:, None] + 0.5 * (1.0 + nodes[None, :])) / panels
    u = u0[:, None, None] + span[:, None, None] * frac[None, :, :]
    values = np.cosh(u) ** (exponent + 1.0)
    total = np.einsum("npq,q->n", values, weights)
    return 0.5 * span / panels * total / eta


def rho_integral(t, eta, xi, exponent: float, order: int = 32):
    """
    ∫₀ᵗ ⟨ξ + ρη⟩^{exponent} dρ, vectorized over broadcast (t, η, ξ).

    Gauss–Legendre in ρ when the integrand is analytic on a wide ellipse around
    [0, t]; otherwise composite Gauss–Legendre after ξ + ρη = sinh u.

    Raises:
        ParameterError: If any t is negative
    """
    t_arr, eta_arr, xi_arr = np.broadcast_arrays(
        np.asarray(t, dtype=np.float64), np.asarray(eta, dtype=np.float64), np.asarray(xi, dtype=np.float64)
    )
    if np.any(t_arr < 0):
        raise ParameterError(f"rho integral needs t >= 0, got min t = {float(np.min(t_arr))}")
    shape = t_arr.shape
    t_flat, eta_flat, xi_flat = t_arr.ravel(), eta_arr.ravel(), xi_arr.ravel()
    out = np.empty(t_flat.shape, dtype=np.float64)
    for start in range(0, t_flat.size, _CHUNK):
        block = slice(start, start + _CHUNK)
        tb, eb, xb = t_flat[block], eta_flat[block], xi_flat[block]
        half = 0.5 * tb * eb
        direct = _ellipse_parameter(xb + half, half) >= _ELLIPSE_MIN
        values = np.empty(tb.shape)
        if np.any(direct):
            values[direct] = _direct_rule(tb[direct], eb[direct], xb[direct], exponent, order)
        if not np.all(direct):
            rest = ~direct
            values[rest] = _sinh_rule(tb[rest], eb[rest], xb[rest], exponent)
        out[block] = values
    if not shape:
        return float(out[0])
    return out.reshape(shape)


# ================================================
# Weights
# ================================================
def psi(t, eta, xi, p: PsiEvaluator):
    """Ψ_s(t, η, ξ) ≥ c0·t."""
    return p.params.c0 * rho_integral(t, eta, xi, p.params.sigma, p.rho_quadrature_order)


def m_from_psi(psi_value, delta: float):
    """M_δ from Ψ in the overflow-free form 1/(δ + e^{-Ψ})."""
    return 1.0 / (delta + np.exp(-np.asarray(psi_value, dtype=np.float64)))


def m_delta(t, eta, xi, p: PsiEvaluator):
    """M_δ(t, η, ξ) ∈ [1/(1+δ), 1/δ)."""
    value = m_from_psi(psi(t, eta, xi, p), p.params.delta)
    return float(value) if np.ndim(value) == 0 else value


def g_exponent(t, v, params: MultiplierParams):
    """c0·t·⟨v⟩^{2s̃}."""
    if np.any(np.asarray(t) < 0):
        raise ParameterError("G_δ needs t >= 0")
    return params.c0 * np.asarray(t, dtype=np.float64) * japanese(np.asarray(v, dtype=np.float64)) ** params.sigma


def g_delta(t, v, p: PsiEvaluator):
    """G_δ(t, v), even in v."""
    value = 1.0 / (p.params.delta + np.exp(-g_exponent(t, v, p.params)))
    return float(value) if np.ndim(value) == 0 else value


def m_delta_grid(t: float, eta: np.ndarray, xi: np.ndarray, p: PsiEvaluator) -> np.ndarray:
    """M_δ on the (η, ξ) tensor grid."""
    eta_mesh, xi_mesh = np.meshgrid(eta, xi, indexing="ij")
    return m_delta(np.full(eta_mesh.shape, t), eta_mesh, xi_mesh, p)


# ================================================
# Sampling
# ================================================
def sample_tez(n: int, seed: int, t_max: float = 1.0, eta_max: float = 4.0, xi_max: float = 4.0) -> np.ndarray:
    """Uniform (t, η, ξ) samples, t ∈ (0, t_max]."""
    rng = np.random.default_rng(seed)
    t = t_max * (1.0 - rng.random(n))
    eta = rng.uniform(-eta_max, eta_max, n)
    xi = rng.uniform(-xi_max, xi_max, n)
    return np.column_stack([t, eta, xi])


def sample_log_ukai(n: int, seed: int, lo: float = 1e-3, hi: float = 1e3) -> np.ndarray:
    """Log-uniform (t, ξ, η) with random signs on ξ and η."""
    rng = np.random.default_rng(seed)
    logs = rng.uniform(math.log(lo), math.log(hi), size=(n, 3))
    signs = rng.choice([-1.0, 1.0], size=(n, 2))
    values = np.exp(logs)
    values[:, 1:] *= signs
    return values


def sample_factorization(
    n: int, seed: int, t_max: float = 1.0, freq_max: float = 6.0, u_max: float = 4.0
) -> np.ndarray:
    """Tuples (t, η, η₁, ξ, u, θ, τ) for the factorization check."""
    rng = np.random.default_rng(seed)
    return np.column_stack(
        [
            t_max * rng.random(n),
            rng.uniform(-freq_max, freq_max, n),
            rng.uniform(-freq_max, freq_max, n),
            rng.uniform(-freq_max, freq_max, n),
            rng.uniform(-u_max, u_max, n),
            rng.uniform(-0.5 * math.pi, 0.5 * math.pi, n),
            rng.random(n),
        ]
    )


def sample_bd(n: int, seed: int, v_max: float = 50.0) -> np.ndarray:
    """Triples (v, v*, θ)."""
    rng = np.random.default_rng(seed)
    return np.column_stack(
        [rng.uniform(-v_max, v_max, n), rng.uniform(-v_max, v_max, n), rng.uniform(-math.pi, math.pi, n)]
    )


def _as_columns(samples: np.ndarray, width: int, name: str) -> np.ndarray:
    array = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if array.shape[1] != width or array.shape[0] == 0:
        raise ParameterError(f"{name} expects a non-empty (n, {width}) sample array, got {array.shape}")
    return array


def _params_dict(p: PsiEvaluator) -> dict[str, float]:
    return {"s": p.params.s, "s_tilde": p.params.s_tilde, "c0": p.params.c0, "delta": p.params.delta}


# ================================================
# Lemma checks
# ================================================
def check_transport_identity(p: PsiEvaluator, samples: np.ndarray, tol: float = 1e-6) -> LemmaReport:
    """
    (∂_t − η∂_ξ)Ψ_s = c0⟨ξ⟩^{2s̃} by Richardson-extrapolated central differences
    along the characteristic τ ↦ (t + τ, η, ξ − ητ).
    """
    cols = _as_columns(samples, 3, "check_transport_identity")
    cols = cols[cols[:, 0] > 0]
    t, eta, xi = cols.T
    h = np.minimum(EPS ** (1.0 / 3.0) * np.maximum(1.0, t), 0.25 * t)

    def along(step):
        return psi(t + step, eta, xi - eta * step, p)

    coarse = (along(h) - along(-h)) / (2.0 * h)
    fine = (along(0.5 * h) - along(-0.5 * h)) / h
    derivative = (4.0 * fine - coarse) / 3.0
    target = p.params.c0 * japanese(xi) ** p.params.sigma
    deviation = np.abs(derivative - target) / target
    worst = float(np.max(deviation)) if deviation.size else 0.0
    logfire.debug(f"transport identity: {cols.shape[0]} samples, max deviation {worst:.3e}")
    return LemmaReport(
        lemma="transport",
        n_samples=int(cols.shape[0]),
        sup_ratio=float(np.max(derivative / target)) if deviation.size else 1.0,
        params=_params_dict(p),
        passed=bool(worst <= tol),
        details={"max_rel_deviation": worst, "tol": tol},
    )


def ukai_ratio(alpha: float, t, xi, eta, order: int = 32):
    """∫₀ᵗ⟨ξ+ρη⟩^α dρ / (t(1 + |ξ|^α + t^α|η|^α))."""
    t = np.asarray(t, dtype=np.float64)
    lhs = rho_integral(t, eta, xi, alpha, order)
    rhs = t * (1.0 + np.abs(xi) ** alpha + t**alpha * np.abs(eta) ** alpha)
    return lhs / rhs


def check_ukai(alpha: float, n: int = 20000, seed: int = 0, lo: float = 1e-3, hi: float = 1e3) -> LemmaReport:
    """
    Two-sided band of the sampled Ukai ratio and its drift under 10x widening.

    Raises:
        ParameterError: Non-positive α or a sample box spanning < 6 decades
    """
    if not 0.0 < alpha <= 2.0:
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    if n < 2 or math.log10(hi / lo) < 6.0:
        raise ParameterError(f"degenerate Ukai sample set: n={n}, range [{lo}, {hi}]")
    bands = []
    for size in (n, 10 * n):
        t, xi, eta = sample_log_ukai(size, seed, lo, hi).T
        ratio = ukai_ratio(alpha, t, xi, eta)
        bands.append((float(np.min(ratio)), float(np.max(ratio))))
    (low, high), (low_wide, high_wide) = bands
    drift = max(abs(low_wide - low) / low, abs(high_wide - high) / high)
    ok = 0.0 < low <= high < math.inf and drift < 0.05
    logfire.info(f"ukai alpha={alpha}: band [{low:.4f}, {high:.4f}], drift {drift:.2%}")
    return LemmaReport(
        lemma="ukai",
        n_samples=11 * n,
        sup_ratio=high_wide,
        params={"alpha": alpha},
        passed=bool(ok),
        details={"c_low": low, "c_high": high, "c_low_wide": low_wide, "c_high_wide": high_wide, "drift": drift},
    )


def _xi_derivatives(p: PsiEvaluator, t, eta, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h1 = EPS ** (1.0 / 3.0)
    h2 = EPS ** 0.25
    center = m_delta(t, eta, xi, p)
    first = (m_delta(t, eta, xi + h1, p) - m_delta(t, eta, xi - h1, p)) / (2.0 * h1)
    second = (m_delta(t, eta, xi + h2, p) - 2.0 * center + m_delta(t, eta, xi - h2, p)) / (h2 * h2)
    return center, first, second


def _spread(values: Sequence[float]) -> float:
    top = max(values)
    return 0.0 if top == 0.0 else (top - min(values)) / top


def check_mdelta_derivatives(
    p: PsiEvaluator, samples: np.ndarray, deltas: Sequence[float] = DEFAULT_DELTAS, tol_spread: float = 0.10
) -> LemmaReport:
    """
    Sup of |∂_ξM_δ|/M_δ and |∂²_ξM_δ|/M_δ per δ.

    Uniformity in δ means no δ exceeds the smallest-δ sup by more than tol_spread;
    larger δ only flattens M_δ, so the raw spread is reported but not bounded.
    """
    t, eta, xi = _as_columns(samples, 3, "check_mdelta_derivatives").T
    firsts, seconds = [], []
    for delta in deltas:
        center, first, second = _xi_derivatives(p.with_delta(delta), t, eta, xi)
        firsts.append(float(np.max(np.abs(first) / center)))
        seconds.append(float(np.max(np.abs(second) / center)))
    finite = all(math.isfinite(value) for value in firsts + seconds)
    spread = max(_spread(firsts), _spread(seconds))
    limit = int(np.argmin(deltas))
    excess = max(
        max(value / max(series[limit], EPS) for value in series) - 1.0 for series in (firsts, seconds)
    )
    return LemmaReport(
        lemma="mdelta",
        n_samples=int(t.size),
        sup_ratio=max(firsts + seconds),
        params=_params_dict(p),
        passed=bool(finite and excess <= tol_spread),
        details={"deltas": list(deltas), "sup_first": firsts, "sup_second": seconds, "spread": spread, "excess": excess},
    )


def check_gdelta_derivatives(
    p: PsiEvaluator, samples: np.ndarray, deltas: Sequence[float] = DEFAULT_DELTAS
) -> LemmaReport:
    """Sup of |∂_vG_δ|/(⟨v⟩^{2s̃−1}G_δ) and |∂²_vG_δ|/(⟨v⟩^{4s̃−2}G_δ) over (t, v) samples."""
    t, v = _as_columns(samples, 2, "check_gdelta_derivatives").T
    sigma = p.params.sigma
    h1 = EPS ** (1.0 / 3.0) * np.maximum(1.0, np.abs(v))
    h2 = EPS**0.25 * np.maximum(1.0, np.abs(v))
    firsts, seconds = [], []
    for delta in deltas:
        q = p.with_delta(delta)
        center = g_delta(t, v, q)
        first = (g_delta(t, v + h1, q) - g_delta(t, v - h1, q)) / (2.0 * h1)
        second = (g_delta(t, v + h2, q) - 2.0 * center + g_delta(t, v - h2, q)) / (h2 * h2)
        bracket = japanese(v)
        firsts.append(float(np.max(np.abs(first) / (bracket ** (sigma - 1.0) * center))))
        seconds.append(float(np.max(np.abs(second) / (bracket ** (2.0 * sigma - 2.0) * center))))
    finite = all(math.isfinite(value) for value in firsts + seconds)
    return LemmaReport(
        lemma="gdelta",
        n_samples=int(t.size),
        sup_ratio=max(firsts + seconds),
        params=_params_dict(p),
        passed=bool(finite),
        details={"deltas": list(deltas), "sup_first": firsts, "sup_second": seconds},
    )


def rotate(a, b, theta):
    """(a cosθ − b sinθ, a sinθ + b cosθ)."""
    c, s = np.cos(theta), np.sin(theta)
    return a * c - b * s, a * s + b * c


def check_factorization_lemma(
    p: PsiEvaluator,
    samples: np.ndarray,
    horizon: Optional[float] = None,
    deltas: Sequence[float] = DEFAULT_DELTAS,
) -> LemmaReport:
    """
    M_δ(t,η,ξ_τ) ≤ C·M_δ(t,η₁,ξ′)·max_± M_δ(t,η−η₁,±u′)·e^{⟨u⟩^{2s̃}}.

    The bound asserted is 9·exp(max(c0T − 1, 0)·sup⟨u⟩^{2s̃}); the variant with
    e^{max(c0t,1)⟨u⟩^{2s̃}} in place of e^{⟨u⟩^{2s̃}} is reported alongside.
    """
    t, eta, eta1, xi, u, theta, tau = _as_columns(samples, 7, "check_factorization_lemma").T
    horizon = float(np.max(t)) if horizon is None else horizon
    sigma = p.params.sigma
    c0 = p.params.c0
    xi_prime, u_prime = rotate(xi, u, theta)
    xi_tau = xi_prime - tau * (xi_prime - xi)
    weight_u = japanese(u) ** sigma
    guard = 9.0 * math.exp(max(c0 * horizon - 1.0, 0.0) * float(np.max(weight_u)))

    sup_plain, sup_guarded = [], []
    for delta in deltas:
        q = p.with_delta(delta)
        lhs = m_delta(t, eta, xi_tau, q)
        partner = np.maximum(m_delta(t, eta - eta1, u_prime, q), m_delta(t, eta - eta1, -u_prime, q))
        base = m_delta(t, eta1, xi_prime, q) * partner
        sup_plain.append(float(np.max(lhs / (base * np.exp(weight_u)))))
        sup_guarded.append(float(np.max(lhs / (base * np.exp(np.maximum(c0 * t, 1.0) * weight_u)))))
    worst = max(sup_plain)
    return LemmaReport(
        lemma="factorization",
        n_samples=int(t.size),
        sup_ratio=worst,
        params={**_params_dict(p), "T": horizon},
        passed=bool(worst <= guard),
        details={
            "guard": guard,
            "deltas": list(deltas),
            "sup_plain": sup_plain,
            "sup_guarded": sup_guarded,
            "spread": _spread(sup_plain),
        },
    )


def bd_ratio(s: float, v, v_star, theta):
    """(⟨v*⟩^{2s} + ⟨v⟩^{2s}) / (⟨v*′⟩^{2s} + ⟨v′⟩^{2s})."""
    v_prime, v_star_prime = rotate(v, v_star, theta)
    before = japanese(v_star) ** (2.0 * s) + japanese(v) ** (2.0 * s)
    after = japanese(v_star_prime) ** (2.0 * s) + japanese(v_prime) ** (2.0 * s)
    return before / after


def check_bd_lemma(s: float, samples: np.ndarray) -> LemmaReport:
    """2^{s−1} ≤ ratio ≤ 2^{1−s} on every sample; ratio ≡ 1 at s = 1."""
    if not 0.0 < s <= 1.0:
        raise ParameterError(f"s must lie in (0, 1], got {s}")
    v, v_star, theta = _as_columns(samples, 3, "check_bd_lemma").T
    ratio = bd_ratio(s, v, v_star, theta)
    slack = 1e-12
    lower, upper = 2.0 ** (s - 1.0), 2.0 ** (1.0 - s)
    violations = int(np.count_nonzero((ratio < lower * (1.0 - slack)) | (ratio > upper * (1.0 + slack))))
    max_dev = float(np.max(np.abs(ratio - 1.0)))
    ok = violations == 0 and (s < 1.0 or max_dev <= 1e-12)
    return LemmaReport(
        lemma="bd",
        n_samples=int(v.size),
        sup_ratio=float(np.max(ratio)),
        params={"s": s},
        passed=bool(ok),
        details={"min_ratio": float(np.min(ratio)), "violations": violations, "max_dev_from_one": max_dev},
    )


def check_subadditivity(sigma: float, samples: np.ndarray) -> LemmaReport:
    """⟨ξ⟩^σ ≤ ⟨ξ−η⟩^σ + ⟨η⟩^σ; violations are expected only for σ > 1."""
    xi, eta = _as_columns(samples, 2, "check_subadditivity").T
    lhs = japanese(xi) ** sigma
    rhs = japanese(xi - eta) ** sigma + japanese(eta) ** sigma
    ratio = lhs / rhs
    violations = int(np.count_nonzero(ratio > 1.0 + 1e-12))
    return LemmaReport(
        lemma="subadd",
        n_samples=int(xi.size),
        sup_ratio=float(np.max(ratio)),
        params={"sigma": sigma},
        passed=violations == 0,
        details={"violations": violations},
    )


def check_psi_symmetry(p: PsiEvaluator, samples: np.ndarray, tol: float = 1e-10) -> LemmaReport:
    """|Ψ(t,η,−tη−ξ) − Ψ(t,η,ξ)| ≤ tol·(1 + Ψ)."""
    t, eta, xi = _as_columns(samples, 3, "check_psi_symmetry").T
    direct = psi(t, eta, xi, p)
    mirrored = psi(t, eta, -t * eta - xi, p)
    scaled = np.abs(mirrored - direct) / (1.0 + direct)
    worst = float(np.max(scaled))
    return LemmaReport(
        lemma="symmetry",
        n_samples=int(t.size),
        sup_ratio=worst,
        params=_params_dict(p),
        passed=bool(worst <= tol),
        details={"tol": tol},
    )


def check_monotonicity(
    p: PsiEvaluator, samples: np.ndarray, deltas: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4)
) -> LemmaReport:
    """M_δ strictly decreasing in δ; M_δ, G_δ ≤ 1/δ; x ↦ x/(1+δx) increasing."""
    t, eta, xi = _as_columns(samples, 3, "check_monotonicity").T
    ordered = sorted(deltas)
    stacked = np.stack([m_delta(t, eta, xi, p.with_delta(delta)) for delta in ordered])
    decreasing = bool(np.all(np.diff(stacked, axis=0) < 0.0))
    bounded_m = all(bool(np.all(row <= 1.0 / delta)) for row, delta in zip(stacked, ordered))
    bounded_g = all(bool(np.all(g_delta(t, xi, p.with_delta(delta)) <= 1.0 / delta)) for delta in ordered)
    grid = np.sort(np.exp(np.linspace(-5.0, 20.0, 256)))
    increasing = all(bool(np.all(np.diff(grid / (1.0 + delta * grid)) > 0.0)) for delta in ordered)
    ok = decreasing and bounded_m and bounded_g and increasing
    return LemmaReport(
        lemma="monotonicity",
        n_samples=int(t.size),
        sup_ratio=float(np.max(stacked * np.asarray(ordered)[:, None])),
        params=_params_dict(p),
        passed=ok,
        details={"decreasing": decreasing, "bounded_m": bounded_m, "bounded_g": bounded_g, "increasing": increasing},
    )
