"""
Empirical-constant suites for the operator inequalities.

Every suite evaluates a ratio |pairing| / majorant over a seeded corpus, on two
grid resolutions and, where relevant, over a δ sweep and both singularity
branches of s. A suite passes when every sup ratio is finite and stable: δ-spread
below `spread_tol`, grid-doubling drift below `drift_tol` and, for the trilinear
bounds, quadrature-refinement change below `refine_tol`.

`run_suites` is the registry used by the command line; it also dispatches the
sampled lemma checkers of the multiplier and collision services.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence, Union

import logfire
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from config.settings import settings
from schemas.report_schema import LemmaReport, RatioEntry, RatioSuite
from services.collision import (
    CollisionQuadrature,
    CrossSection,
    QuadratureConfig,
    apply_calK_full,
    build_quadrature,
    check_cancellation,
    check_even_odd,
    convergence_report,
    grazing_tail_exponent,
    linearized_operator,
    trilinear_tensor,
)
from services.corpus import Corpus, hermite_function
from services.errors import ParameterError, SuiteError
from services.grid import SQRT_2PI, GridSpec, PhaseField, fft_v, fft_x, fft_xv, ifft_v, ifft_xv
from services.maxwellian import mu_power_hat
from services.multiplier import (
    DEFAULT_DELTAS,
    MultiplierParams,
    PsiEvaluator,
    check_bd_lemma,
    check_factorization_lemma,
    check_gdelta_derivatives,
    check_mdelta_derivatives,
    check_monotonicity,
    check_psi_symmetry,
    check_subadditivity,
    check_transport_identity,
    check_ukai,
    g_delta,
    japanese,
    m_delta_grid,
    m_from_psi,
    psi,
    sample_bd,
    sample_factorization,
    sample_tez,
)
from services.norms import (
    apply_m_delta,
    norm_hr_l2,
    norm_sobolev_hs,
    norm_vweight,
    triple_norm_r0,
    weighted_norm_m,
)

TINY = float(np.finfo(np.float64).tiny)
K_AGREEMENT_TOL = 1e-10

SuiteResult = Union[RatioSuite, LemmaReport]


# ================================================
# Configuration
# ================================================
class VerifyConfig(BaseModel):
    """Parameters shared by the ratio suites and lemma checkers."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    grids: tuple[GridSpec, ...] = (GridSpec(Nx=8, Nv=32), GridSpec(Nx=16, Nv=64))
    quadrature: QuadratureConfig = QuadratureConfig(eps=1e-3, panels=12, order=8, hermite_order=40)
    s: float = Field(default=0.25, gt=0.0, lt=1.0)  # Order for single-branch suites
    s_list: tuple[float, ...] = (0.25, 0.75)
    bd_s_list: tuple[float, ...] = (0.3, 0.7, 1.0)
    alphas: tuple[float, ...] = (0.3, 0.5, 1.0)
    r: float = Field(default=1.0, gt=0.5)
    c0: float = Field(default=0.5, gt=0.0)
    mdelta_c0: float = Field(default=0.2, gt=0.0)
    t: float = Field(default=0.5, ge=0.0)  # Time at which the weights are evaluated
    deltas: tuple[float, ...] = DEFAULT_DELTAS
    corpus_size: int = Field(default=50, ge=1)
    a_corpus_size: int = Field(default=8, ge=1)
    lemma_samples: int = Field(default=20000, ge=2)
    bd_samples: int = Field(default=1_000_000, ge=1)
    seed: int = Field(default=0, ge=0)
    workers: Optional[int] = None
    spread_tol: float = 0.10
    drift_tol: float = 0.20
    refine_tol: float = 0.05
    identity_tol: float = 1e-8
    coercivity_shift: float = Field(default=1.0, ge=0.0)  # C′ in (ℒg, g) + C′||g||²

    @property
    def q(self) -> CollisionQuadrature:
        return build_quadrature(self.quadrature)

    def psi(self, s: float, delta: float = 1e-2, c0: Optional[float] = None) -> PsiEvaluator:
        return PsiEvaluator(params=MultiplierParams(s=s, c0=self.c0 if c0 is None else c0, delta=delta, r=self.r))

    def corpus(self, size: Optional[int] = None) -> Corpus:
        return Corpus(seed=self.seed, size=size or self.corpus_size, workers=self.workers)


# ================================================
# Shared helpers
# ================================================
def inner_hr(a: np.ndarray, b: np.ndarray, spec: GridSpec, r: float) -> float:
    """Real part of (a, b)_{H^r_x(L²_v)} on raw samples."""
    weight = japanese(spec.eta)[:, None] ** (2.0 * r)
    pairing = np.conj(fft_x(a, spec)) * fft_x(b, spec)
    return float(spec.d_eta * spec.dv * np.sum(weight * pairing).real)


def _ratio(numerator: float, denominator: float) -> Optional[float]:
    """None marks a degenerate denominator."""
    if numerator == 0.0:
        return 0.0
    if not math.isfinite(denominator) or denominator <= TINY:
        return None
    return numerator / denominator


def _parallel(fn: Callable, items: Sequence, workers: Optional[int]) -> list:
    with ThreadPoolExecutor(max_workers=max(1, workers or settings.WORKERS)) as pool:
        return list(pool.map(fn, items))


def _entry(label: str, ratios: Sequence[Optional[float]], extra: Optional[dict] = None) -> RatioEntry:
    used = [value for value in ratios if value is not None]
    return RatioEntry(
        label=label,
        sup_ratio=max(used) if used else 0.0,
        n_used=len(used),
        n_degenerate=len(ratios) - len(used),
        extra=extra or {},
    )


def _relative(a: float, b: float) -> float:
    top = max(abs(a), abs(b))
    return 0.0 if top == 0.0 else abs(a - b) / top


def _spread(values: Sequence[float]) -> float:
    top = max(values)
    return 0.0 if top == 0.0 else (top - min(values)) / top


def _grid_label(spec: GridSpec) -> str:
    return f"{spec.Nx}x{spec.Nv}"


def _finish(
    name: str,
    cfg: VerifyConfig,
    corpus_size: int,
    entries: list[RatioEntry],
    stability: dict[str, float],
    checks: dict[str, bool],
) -> RatioSuite:
    finite = all(math.isfinite(entry.sup_ratio) for entry in entries)
    failed = [key for key, ok in checks.items() if not ok]
    passed = finite and not failed
    message = "ok" if passed else ("non-finite ratio" if not finite else "unstable: " + ", ".join(failed))
    suite = RatioSuite(
        name=name,
        corpus_size=corpus_size,
        seed=cfg.seed,
        entries=entries,
        sup_ratio=max((entry.sup_ratio for entry in entries), default=0.0),
        stability=stability,
        passed=passed,
        message=message,
    )
    if passed:
        logfire.info(f"suite {name}: sup ratio {suite.sup_ratio:.4g}, pass")
    else:
        logfire.warning(f"suite {name}: sup ratio {suite.sup_ratio:.4g}, fail ({message})")
    return suite


# ================================================
# Trilinear bounds
# ================================================
def trilinear_ratio(
    f: PhaseField,
    g: PhaseField,
    h: PhaseField,
    q: CollisionQuadrature,
    cs: CrossSection,
    r: float,
    alpha: float = 0.5,
) -> Optional[float]:
    """|(𝒯(f, g, μ^α), h)_{H^r}| / (||f||_{H^r} |||g|||_{(r,0)} |||h|||_{(r,0)})."""
    spec = f.spec
    tensor = trilinear_tensor(spec, q.config, cs, float(alpha))
    value = ifft_v(tensor.apply(f.data.astype(np.complex128), g.data.astype(np.complex128)), spec).real
    numerator = abs(inner_hr(value, h.data, spec, r))
    denominator = norm_hr_l2(f, r) * triple_norm_r0(g, r, q, cs) * triple_norm_r0(h, r, q, cs)
    return _ratio(numerator, denominator)


def _trilinear_suite(name: str, corpus: Corpus, cfg: VerifyConfig, alpha: float) -> RatioSuite:
    cs = CrossSection(s=cfg.s)
    entries, sups = [], []
    for spec in cfg.grids:
        trilinear_tensor(spec, cfg.quadrature, cs, float(alpha))
        triples = corpus.triples(spec)
        ratios = _parallel(lambda t: trilinear_ratio(*t, cfg.q, cs, cfg.r, alpha), triples, cfg.workers)
        entries.append(_entry(f"{_grid_label(spec)} alpha={alpha}", ratios))
        sups.append(entries[-1].sup_ratio)
    fine = cfg.q.refine()
    base_spec = cfg.grids[0]
    refined = [trilinear_ratio(*t, fine, cs, cfg.r, alpha) for t in corpus.triples(base_spec)]
    entries.append(_entry(f"{_grid_label(base_spec)} alpha={alpha} refined", refined))
    drift = _relative(sups[0], sups[-1])
    refine = _relative(sups[0], entries[-1].sup_ratio)
    return _finish(
        name,
        cfg,
        corpus.size,
        entries,
        {"grid_drift": drift, "refine_change": refine},
        {"grid_drift": drift < cfg.drift_tol, "refine_change": refine < cfg.refine_tol},
    )


def check_trilinear_K(corpus: Corpus, cfg: VerifyConfig) -> RatioSuite:
    """|(𝒦(f, g), h)| ≤ C ||f||_{H^r} |||g|||_{(r,0)} |||h|||_{(r,0)}."""
    return _trilinear_suite("trilinear_K", corpus, cfg, 0.5)


def check_trilinear_T(corpus: Corpus, alpha: float, cfg: VerifyConfig) -> RatioSuite:
    """The trilinear bound for 𝒯(f, g, μ^α); requires α > 1/4."""
    if alpha <= 0.25:
        raise ParameterError(f"weight exponent must exceed 1/4, got {alpha}")
    return _trilinear_suite(f"trilinear_T(alpha={alpha})", corpus, cfg, alpha)


def check_trilinear_T_consistency(
    corpus: Corpus, cfg: VerifyConfig, base_sups: Optional[dict[float, float]] = None
) -> RatioSuite:
    """
    Cross-checks of the 𝒯 family on the base grid: α = 1/2 reproduces the 𝒦 ratios
    to `K_AGREEMENT_TOL`, and the sup ratio at the smallest α is at least the one at
    the largest α.
    """
    spec = cfg.grids[0]
    cs = CrossSection(s=cfg.s)
    q = cfg.q
    r = cfg.r
    triples = corpus.triples(spec)

    def both(item: tuple[PhaseField, PhaseField, PhaseField]) -> tuple[Optional[float], Optional[float]]:
        f, g, h = item
        via_t = trilinear_ratio(f, g, h, q, cs, r, 0.5)
        collided = apply_calK_full(f, g, q, cs)
        denominator = norm_hr_l2(f, r) * triple_norm_r0(g, r, q, cs) * triple_norm_r0(h, r, q, cs)
        return via_t, _ratio(abs(inner_hr(collided.data, h.data, spec, r)), denominator)

    pairs = _parallel(both, triples, cfg.workers)
    agreement = max((_relative(a, b) for a, b in pairs if a is not None and b is not None), default=0.0)
    low, high = min(cfg.alphas), max(cfg.alphas)
    sups = dict(base_sups or {})
    for alpha in (low, high):
        if alpha not in sups:
            sups[alpha] = _entry("", [trilinear_ratio(*t, q, cs, r, alpha) for t in triples]).sup_ratio
    entries = [
        _entry(f"{_grid_label(spec)} alpha=0.5 via T", [a for a, _ in pairs]),
        _entry(f"{_grid_label(spec)} alpha=0.5 via K", [b for _, b in pairs]),
        RatioEntry(label=f"{_grid_label(spec)} alpha={low}", sup_ratio=sups[low], n_used=len(triples)),
        RatioEntry(label=f"{_grid_label(spec)} alpha={high}", sup_ratio=sups[high], n_used=len(triples)),
    ]
    ordered = low == high or sups[low] >= sups[high]
    if not ordered:
        logfire.warning(f"trilinear_T: sup ratio at alpha={low} ({sups[low]:.4g}) below alpha={high} ({sups[high]:.4g})")
    return _finish(
        "trilinear_T(consistency)",
        cfg,
        len(triples),
        entries,
        {"k_agreement": agreement, "alpha_ordering": sups[low] - sups[high]},
        {"k_agreement": agreement <= K_AGREEMENT_TOL, "alpha_ordering": ordered},
    )


# ================================================
# Commutators with the linearized operator
# ================================================
RatioFactory = Callable[[GridSpec, CrossSection, PsiEvaluator], Callable[[PhaseField, PhaseField], Optional[float]]]


def _sweep_suite(
    name: str,
    corpus: Corpus,
    cfg: VerifyConfig,
    deltas: Sequence[float],
    s_list: Sequence[float],
    factory: RatioFactory,
    arity: int = 2,
) -> RatioSuite:
    entries: list[RatioEntry] = []
    table: dict[tuple[float, float, int], float] = {}
    for s in s_list:
        cs = CrossSection(s=s)
        for index, spec in enumerate(cfg.grids):
            items = corpus.pairs(spec) if arity == 2 else corpus.triples(spec)
            linearized_operator(spec, cfg.quadrature, cs)
            trilinear_tensor(spec, cfg.quadrature, cs, 0.5)
            for delta in deltas:
                ratio = factory(spec, cs, cfg.psi(s, delta))
                ratios = _parallel(lambda item: ratio(*item), items, cfg.workers)
                entries.append(_entry(f"s={s} delta={delta!r} {_grid_label(spec)}", ratios))
                table[(s, delta, index)] = entries[-1].sup_ratio
    spreads = [_spread([table[(s, d, i)] for d in deltas]) for s in s_list for i in range(len(cfg.grids))]
    drifts = [_relative(table[(s, d, 0)], table[(s, d, len(cfg.grids) - 1)]) for s in s_list for d in deltas]
    spread, drift = max(spreads), max(drifts)
    return _finish(
        name,
        cfg,
        corpus.size,
        entries,
        {"delta_spread": spread, "grid_drift": drift},
        {"delta_spread": spread < cfg.spread_tol, "grid_drift": drift < cfg.drift_tol},
    )


def _apply_m(data: np.ndarray, spec: GridSpec, weight: np.ndarray) -> np.ndarray:
    return ifft_xv(weight * fft_xv(data, spec), spec).real


def commutator_L_M_factory(t: float, r: float, quadrature: QuadratureConfig) -> RatioFactory:
    """Ratio |([ℒ, M_δ]g, h)| / (||M_δ g|| ||h||) at time t."""

    def factory(spec: GridSpec, cs: CrossSection, p: PsiEvaluator):
        operator = linearized_operator(spec, quadrature, cs)
        weight = m_delta_grid(t, spec.eta, spec.xi, p)

        def ratio(g: PhaseField, h: PhaseField) -> Optional[float]:
            weighted = _apply_m(g.data, spec, weight)
            commutator = _apply_m(operator.apply_physical(g.data), spec, weight) - operator.apply_physical(weighted)
            numerator = abs(inner_hr(commutator, h.data, spec, r))
            return _ratio(numerator, norm_hr_l2(g.with_data(weighted), r) * norm_hr_l2(h, r))

        return ratio

    return factory


def commutator_L_G_factory(t: float, r: float, quadrature: QuadratureConfig) -> RatioFactory:
    """Ratio |([ℒ, G_δ]g, h)| / (||⟨v⟩^s G_δ g|| ||h||) at time t."""

    def factory(spec: GridSpec, cs: CrossSection, p: PsiEvaluator):
        operator = linearized_operator(spec, quadrature, cs)
        weight = np.asarray(g_delta(t, spec.v, p))[None, :]

        def ratio(g: PhaseField, h: PhaseField) -> Optional[float]:
            weighted = g.data * weight
            commutator = operator.apply_physical(g.data) * weight - operator.apply_physical(weighted)
            numerator = abs(inner_hr(commutator, h.data, spec, r))
            return _ratio(numerator, norm_vweight(g.with_data(weighted), r, cs.s) * norm_hr_l2(h, r))

        return ratio

    return factory


def check_commutator_L_M(
    corpus: Corpus, cfg: VerifyConfig, delta_list: Optional[Sequence[float]] = None
) -> RatioSuite:
    """|([ℒ, M_δ]g, h)| ≤ C ||M_δ g|| ||h|| uniformly in δ."""
    factory = commutator_L_M_factory(cfg.t, cfg.r, cfg.quadrature)
    return _sweep_suite("comm_LM", corpus, cfg, delta_list or cfg.deltas, cfg.s_list, factory)


def check_commutator_L_G(
    corpus: Corpus, cfg: VerifyConfig, delta_list: Optional[Sequence[float]] = None
) -> RatioSuite:
    """|([ℒ, G_δ]g, h)| ≤ C ||⟨v⟩^s G_δ g|| ||h|| uniformly in δ."""
    factory = commutator_L_G_factory(cfg.t, cfg.r, cfg.quadrature)
    return _sweep_suite("comm_LG", corpus, cfg, delta_list or cfg.deltas, cfg.s_list, factory)


def nonlinear_G_factory(t: float, r: float, quadrature: QuadratureConfig) -> RatioFactory:
    """Ratio |(𝒦(f, G_δg) − G_δ𝒦(f, g), h)| / (||G_δ f|| ||G_δ g|| |||h|||_{(r,0)})."""

    def factory(spec: GridSpec, cs: CrossSection, p: PsiEvaluator):
        tensor = trilinear_tensor(spec, quadrature, cs, 0.5)
        q = build_quadrature(quadrature)
        weight = np.asarray(g_delta(t, spec.v, p))[None, :]

        def calK(f: np.ndarray, g: np.ndarray) -> np.ndarray:
            return ifft_v(tensor.apply(f.astype(np.complex128), g.astype(np.complex128)), spec).real

        def ratio(f: PhaseField, g: PhaseField, h: PhaseField) -> Optional[float]:
            commutator = calK(f.data, g.data * weight) - weight * calK(f.data, g.data)
            numerator = abs(inner_hr(commutator, h.data, spec, r))
            denominator = (
                norm_hr_l2(f.with_data(f.data * weight), r)
                * norm_hr_l2(g.with_data(g.data * weight), r)
                * triple_norm_r0(h, r, q, cs)
            )
            return _ratio(numerator, denominator)

        return ratio

    return factory


def check_nonlinear_G_commutator(corpus: Corpus, cfg: VerifyConfig) -> RatioSuite:
    """|(𝒦(f, G_δg) − G_δ𝒦(f, g), h)| ≤ C ||G_δ f|| ||G_δ g|| |||h|||_{(r,0)}."""
    factory = nonlinear_G_factory(cfg.t, cfg.r, cfg.quadrature)
    return _sweep_suite("nonlinear_G", corpus, cfg, cfg.deltas, (cfg.s,), factory, arity=3)


# ================================================
# A₁ + A₂ + A₃ decomposition
# ================================================
class ATerms(BaseModel):
    """
    The three terms of (M_δ𝒦(f, g), h) and the undecomposed pairing, for one δ.

    pairing is summed on the same rotated plane and θ-rule as the three terms;
    tensor_pairing comes from the discretized 𝒦 and measures quadrature agreement.
    """

    model_config = ConfigDict(frozen=True)

    delta: float
    a1: complex
    a2: complex
    a3: complex
    pairing: complex
    tensor_pairing: complex

    @property
    def residual(self) -> float:
        scale = abs(self.a1) + abs(self.a2) + abs(self.a3) + abs(self.pairing)
        return 0.0 if scale == 0.0 else abs(self.a1 + self.a2 + self.a3 - self.pairing) / scale

    @property
    def quadrature_gap(self) -> float:
        scale = abs(self.pairing) + abs(self.tensor_pairing)
        return 0.0 if scale == 0.0 else abs(self.pairing - self.tensor_pairing) / scale


def a_decomposition(
    f: PhaseField,
    g: PhaseField,
    h: PhaseField,
    q: CollisionQuadrature,
    cs: CrossSection,
    p: PsiEvaluator,
    t: float,
    deltas: Sequence[float],
) -> list[ATerms]:
    """
    Split the rotated form of (M_δ𝒦(f, g), h)_{H^r} into

        A₁ = ∫β f̂(u′)ĝ(ξ′) ω̂(u) [M(η,ξ) − M(η,ξ′)] conj ĥ(η,ξ)
        A₂ = ∫β f̂(u′)ĝ(ξ′) M(η,ξ′) [ω̂(u) − ω̂(u′)] conj ĥ(η,ξ)
        A₃ = ∫β f̂(u′)ĝ(ξ′) M(η,ξ′) ω̂(u′) [conj ĥ(η,ξ) − conj ĥ(η,ξ′)]

    with ω̂ = FT(√μ), the x-convolution carried by pointwise products in x, and the
    (ξ, u) plane sampled on the ξ-grid. Transforms vanish outside |ξ| < ξ_N. The
    undecomposed integrand ω̂(u)M(η,ξ) conj ĥ(η,ξ) − M(η,ξ′)ω̂(u′) conj ĥ(η,ξ′) is
    summed on the same plane; the pairing against the discretized 𝒦 is kept
    alongside.
    """
    spec = f.spec
    r = p.params.r
    v = spec.v
    xi = spec.xi
    xi_n = math.pi / spec.dv
    scale = spec.dv / SQRT_2PI
    eta_weight = japanese(spec.eta)[:, None, None] ** (2.0 * r)
    measure = spec.d_eta * spec.d_xi * spec.d_xi
    psi_grid = psi(np.full((spec.Nx, spec.Nv), float(t)), *spec.dual_mesh(), p)
    h_hat = fft_xv(h.data, spec)
    h_mixed = fft_x(h.data, spec)
    omega_u = mu_power_hat(xi, 0.5)[None, None, :]
    eta_mesh = np.broadcast_to(spec.eta[:, None, None], (spec.Nx, spec.Nv, spec.Nv))
    sums = {delta: np.zeros(4, dtype=np.complex128) for delta in deltas}
    with logfire.span(f"A-decomposition over {q.theta.size} angles"):
        for theta, bw in zip(q.theta, q.beta_weights(cs)):
            c, s = math.cos(theta), math.sin(theta)
            phase_c = np.exp(-1j * c * np.multiply.outer(xi, v))
            phase_s = np.exp(-1j * s * np.multiply.outer(xi, v))
            u_prime = s * xi[:, None] + c * xi[None, :]
            xi_prime = c * xi[:, None] - s * xi[None, :]
            in_u = (np.abs(u_prime) < xi_n)[None]
            in_xi = (np.abs(xi_prime) < xi_n)[None]
            f_up = np.where(in_u, scale * np.einsum("xj,mj,kj->xmk", f.data, phase_s, phase_c, optimize=True), 0.0)
            g_xp = np.where(in_xi, scale * np.einsum("xj,mj,kj->xmk", g.data, phase_c, np.conj(phase_s), optimize=True), 0.0)
            h_xp = np.where(in_xi, scale * np.einsum("xj,mj,kj->xmk", h_mixed, phase_c, np.conj(phase_s), optimize=True), 0.0)
            product = fft_x((f_up * g_xp).reshape(spec.Nx, -1), spec).reshape(spec.Nx, spec.Nv, spec.Nv)
            kernel = bw * eta_weight * product
            psi_prime = psi(np.full(eta_mesh.shape, float(t)), eta_mesh, np.broadcast_to(xi_prime, eta_mesh.shape), p)
            omega_up = mu_power_hat(u_prime, 0.5)[None]
            h_bar = np.conj(h_hat)[:, :, None]
            h_bar_prime = np.conj(h_xp)
            for delta in deltas:
                m = m_from_psi(psi_grid, delta)[:, :, None]
                m_prime = m_from_psi(psi_prime, delta)
                sums[delta] += np.array(
                    [
                        np.sum(kernel * omega_u * (m - m_prime) * h_bar),
                        np.sum(kernel * m_prime * (omega_u - omega_up) * h_bar),
                        np.sum(kernel * m_prime * omega_up * (h_bar - h_bar_prime)),
                        np.sum(kernel * (omega_u * m * h_bar - m_prime * omega_up * h_bar_prime)),
                    ]
                )
    tensor = trilinear_tensor(spec, q.config, cs, 0.5)
    collided = fft_x(tensor.apply(f.data.astype(np.complex128), g.data.astype(np.complex128)), spec)
    terms = []
    for delta in deltas:
        m = m_from_psi(psi_grid, delta)
        tensor_pairing = spec.d_eta * spec.d_xi * np.sum(eta_weight[:, :, 0] * m * collided * np.conj(h_hat))
        a1, a2, a3, pairing = measure * sums[delta]
        terms.append(
            ATerms(
                delta=delta,
                a1=complex(a1),
                a2=complex(a2),
                a3=complex(a3),
                pairing=complex(pairing),
                tensor_pairing=complex(tensor_pairing),
            )
        )
    return terms


def check_A_decomposition(corpus: Corpus, cfg: VerifyConfig) -> RatioSuite:
    """
    Identity A₁ + A₂ + A₃ = (M_δ𝒦(f, g), h) and the three majorant ratios

        |A₁| / (||M_δf|| ||M_δg|| ||h||_{H^r_x H^s_v})
        |A₂| / (||M_δf|| |||M_δg||| |||h|||)
        |A₃| / (||M_δf|| ||M_δg|| ||h||)
    """
    spec = cfg.grids[0]
    cs = CrossSection(s=cfg.s)
    q = cfg.q
    r = cfg.r
    triples = corpus.triples(spec)[: cfg.a_corpus_size]
    trilinear_tensor(spec, cfg.quadrature, cs, 0.5)
    base = cfg.psi(cfg.s)
    decompositions = _parallel(
        lambda item: a_decomposition(*item, q, cs, base, cfg.t, cfg.deltas), triples, cfg.workers
    )
    entries, residual, gap = [], 0.0, 0.0
    per_term: dict[int, list[float]] = {1: [], 2: [], 3: []}
    for index, delta in enumerate(cfg.deltas):
        p = base.with_delta(delta)
        ratios: dict[int, list[Optional[float]]] = {1: [], 2: [], 3: []}
        for (f, g, h), terms in zip(triples, decompositions):
            term = terms[index]
            residual = max(residual, term.residual)
            gap = max(gap, term.quadrature_gap)
            mf = weighted_norm_m(f, p, cfg.t)
            mg = weighted_norm_m(g, p, cfg.t)
            triple_mg = triple_norm_r0(apply_m_delta(g, p, cfg.t), r, q, cs)
            ratios[1].append(_ratio(abs(term.a1), mf * mg * norm_sobolev_hs(h, r, cfg.s)))
            ratios[2].append(_ratio(abs(term.a2), mf * triple_mg * triple_norm_r0(h, r, q, cs)))
            ratios[3].append(_ratio(abs(term.a3), mf * mg * norm_hr_l2(h, r)))
        for k in (1, 2, 3):
            entries.append(_entry(f"A{k} delta={delta!r} {_grid_label(spec)}", ratios[k]))
            per_term[k].append(entries[-1].sup_ratio)
    spread = max(_spread(values) for values in per_term.values())
    return _finish(
        "A_decomp",
        cfg,
        len(triples),
        entries,
        {"identity_residual": residual, "quadrature_gap": gap, "delta_spread": spread},
        {"identity_residual": residual <= cfg.identity_tol, "delta_spread": spread < cfg.spread_tol},
    )


# ================================================
# Anisotropic norm relations
# ================================================
def _single_suite(
    name: str,
    corpus: Corpus,
    cfg: VerifyConfig,
    ratio_for: Callable[[GridSpec, CrossSection], Callable[[PhaseField], Optional[float]]],
    orientation: str = "",
    extra_for: Optional[Callable[[float], dict[str, float]]] = None,
) -> RatioSuite:
    entries, table = [], {}
    for s in cfg.s_list:
        cs = CrossSection(s=s)
        for index, spec in enumerate(cfg.grids):
            linearized_operator(spec, cfg.quadrature, cs)
            ratio = ratio_for(spec, cs)
            ratios = _parallel(ratio, corpus.fields(spec), cfg.workers)
            label = f"s={s} {_grid_label(spec)}" + (f" {orientation}" if orientation else "")
            entry = _entry(label, ratios)
            if extra_for is not None:
                entry = entry.model_copy(update={"extra": extra_for(entry.sup_ratio)})
            entries.append(entry)
            table[(s, index)] = entries[-1].sup_ratio
    drift = max(_relative(table[(s, 0)], table[(s, len(cfg.grids) - 1)]) for s in cfg.s_list)
    return _finish(name, cfg, corpus.size, entries, {"grid_drift": drift}, {"grid_drift": drift < cfg.drift_tol})


def check_coercivity(corpus: Corpus, cfg: VerifyConfig) -> RatioSuite:
    """
    ((ℒg, g)_{H^r} + C′||g||²_{H^r}) / |||g|||²_{(r,0)} ≥ c_emp.

    Entries carry the inverse ratio, so each sup ratio is 1 / c_emp; every entry
    records `c_emp` and the shift C′ (`coercivity_shift`) in its extras.
    """
    q = cfg.q
    shift = cfg.coercivity_shift

    def ratio_for(spec: GridSpec, cs: CrossSection):
        operator = linearized_operator(spec, cfg.quadrature, cs)

        def ratio(g: PhaseField) -> Optional[float]:
            dissipation = inner_hr(operator.apply_physical(g.data), g.data, spec, cfg.r)
            return _ratio(triple_norm_r0(g, cfg.r, q, cs) ** 2, dissipation + shift * norm_hr_l2(g, cfg.r) ** 2)

        return ratio

    def extra_for(sup: float) -> dict[str, float]:
        return {"c_emp": 1.0 / sup if sup > 0.0 else math.inf, "shift": shift}

    return _single_suite(
        "coercivity",
        corpus,
        cfg,
        ratio_for,
        orientation="inverse |||g|||^2/((Lg,g)+C'||g||^2)",
        extra_for=extra_for,
    )


def check_triple_lower_bound(corpus: Corpus, cfg: VerifyConfig) -> RatioSuite:
    """||g||²_{H^r_x H^s_v} + ||⟨v⟩^s g||²_{H^r} ≤ C (|||g|||²_{(r,0)} + ||g||²_{H^r})."""
    q = cfg.q

    def ratio_for(spec: GridSpec, cs: CrossSection):
        def ratio(g: PhaseField) -> Optional[float]:
            upper = norm_sobolev_hs(g, cfg.r, cs.s) ** 2 + norm_vweight(g, cfg.r, cs.s) ** 2
            return _ratio(upper, triple_norm_r0(g, cfg.r, q, cs) ** 2 + norm_hr_l2(g, cfg.r) ** 2)

        return ratio

    return _single_suite("lower_bound", corpus, cfg, ratio_for)


# ================================================
# Lemma checkers and collision checks
# ================================================
def _tv_samples(n: int, seed: int, v_max: float = 20.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.column_stack([1.0 - rng.random(n), rng.uniform(-v_max, v_max, n)])


def _pair_samples(n: int, seed: int, limit: float = 50.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-limit, limit, size=(n, 2))


def _lemma_bd(cfg: VerifyConfig) -> list[SuiteResult]:
    samples = sample_bd(cfg.bd_samples, cfg.seed)
    return [check_bd_lemma(s, samples) for s in cfg.bd_s_list]


def _lemma_ukai(cfg: VerifyConfig) -> list[SuiteResult]:
    return [check_ukai(alpha, n=cfg.lemma_samples, seed=cfg.seed) for alpha in (0.5, 1.0)]


def _lemma_transport(cfg: VerifyConfig) -> list[SuiteResult]:
    samples = sample_tez(cfg.lemma_samples, cfg.seed)
    return [check_transport_identity(cfg.psi(s), samples) for s in cfg.s_list]


def _lemma_mdelta(cfg: VerifyConfig) -> list[SuiteResult]:
    samples = sample_tez(cfg.lemma_samples, cfg.seed)
    return [check_mdelta_derivatives(cfg.psi(s, c0=cfg.mdelta_c0), samples, cfg.deltas) for s in cfg.s_list]


def _lemma_gdelta(cfg: VerifyConfig) -> list[SuiteResult]:
    samples = _tv_samples(cfg.lemma_samples, cfg.seed)
    return [check_gdelta_derivatives(cfg.psi(s), samples, cfg.deltas) for s in cfg.s_list]


def _lemma_factorization(cfg: VerifyConfig) -> list[SuiteResult]:
    samples = sample_factorization(cfg.lemma_samples, cfg.seed)
    return [check_factorization_lemma(cfg.psi(s), samples, deltas=cfg.deltas) for s in cfg.s_list]


def _lemma_subadd(cfg: VerifyConfig) -> list[SuiteResult]:
    samples = _pair_samples(cfg.lemma_samples, cfg.seed)
    return [check_subadditivity(cfg.psi(s).params.sigma, samples) for s in cfg.s_list]


def _lemma_symmetry(cfg: VerifyConfig) -> list[SuiteResult]:
    samples = sample_tez(cfg.lemma_samples, cfg.seed)
    return [check_psi_symmetry(cfg.psi(s), samples) for s in cfg.s_list]


def _lemma_monotonicity(cfg: VerifyConfig) -> list[SuiteResult]:
    samples = sample_tez(cfg.lemma_samples, cfg.seed)
    return [check_monotonicity(cfg.psi(s), samples) for s in cfg.s_list]


def _profile_lines(spec: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    v = spec.v
    return (
        np.exp(-0.25 * np.square(v - 1.0)),
        np.exp(-0.25 * np.square(v + 0.5)),
        hermite_function(1, v) + hermite_function(2, v),
    )


def _collision_cancellation(cfg: VerifyConfig) -> list[SuiteResult]:
    spec = cfg.grids[0]
    f, g, _ = _profile_lines(spec)
    return [check_cancellation(f, g, spec, cfg.q)]


def _collision_even_odd(cfg: VerifyConfig) -> list[SuiteResult]:
    spec = cfg.grids[0]
    f, g, h = _profile_lines(spec)
    p = cfg.psi(cfg.s)
    eta0 = float(spec.eta[1])

    def multiplier(xi_values: np.ndarray) -> np.ndarray:
        xi_values = np.asarray(xi_values, dtype=np.float64)
        return m_from_psi(psi(np.full(xi_values.shape, cfg.t), np.full(xi_values.shape, eta0), xi_values, p), p.params.delta)

    return [
        check_even_odd(f, g, h, multiplier, spec, cfg.q, CrossSection(s=s)) for s in cfg.s_list
    ]


def _collision_grazing(cfg: VerifyConfig) -> list[SuiteResult]:
    spec = cfg.grids[-1]
    f, g, _ = _profile_lines(spec)
    return [grazing_tail_exponent(f, g, spec, CrossSection(s=s)) for s in cfg.s_list]


def _collision_convergence(cfg: VerifyConfig) -> list[SuiteResult]:
    spec = cfg.grids[0]
    f, g, _ = _profile_lines(spec)
    lines = [fft_v(f, spec), fft_v(g, spec)]
    results: list[SuiteResult] = []
    for s in cfg.s_list:
        report = convergence_report("calK", lines, spec, cfg.q, CrossSection(s=s), tol=1e-4)
        results.append(
            LemmaReport(
                lemma=f"collision_convergence(s={s})",
                n_samples=spec.Nv,
                sup_ratio=report.delta_refine,
                params={"s": s, "eps": report.eps},
                passed=report.passed,
                details=report.model_dump(by_alias=True),
            )
        )
    return results


CorpusSuite = Callable[[Corpus, VerifyConfig], Union[RatioSuite, list[RatioSuite]]]


def _trilinear_T_all(corpus: Corpus, cfg: VerifyConfig) -> list[RatioSuite]:
    suites = [check_trilinear_T(corpus, alpha, cfg) for alpha in cfg.alphas]
    base_sups = {alpha: suite.entries[0].sup_ratio for alpha, suite in zip(cfg.alphas, suites)}
    return [*suites, check_trilinear_T_consistency(corpus, cfg, base_sups)]


CORPUS_SUITES: dict[str, CorpusSuite] = {
    "trilinear_K": check_trilinear_K,
    "trilinear_T": _trilinear_T_all,
    "comm_LM": check_commutator_L_M,
    "comm_LG": check_commutator_L_G,
    "A_decomp": check_A_decomposition,
    "nonlinear_G": check_nonlinear_G_commutator,
    "coercivity": check_coercivity,
    "lower_bound": check_triple_lower_bound,
}

LEMMA_CHECKS: dict[str, Callable[[VerifyConfig], list[SuiteResult]]] = {
    "bd": _lemma_bd,
    "ukai": _lemma_ukai,
    "transport": _lemma_transport,
    "mdelta": _lemma_mdelta,
    "gdelta": _lemma_gdelta,
    "factorization": _lemma_factorization,
    "subadd": _lemma_subadd,
    "symmetry": _lemma_symmetry,
    "monotonicity": _lemma_monotonicity,
    "cancellation": _collision_cancellation,
    "even_odd": _collision_even_odd,
    "grazing_tail": _collision_grazing,
    "collision_convergence": _collision_convergence,
}

SUITE_NAMES: tuple[str, ...] = tuple(LEMMA_CHECKS) + tuple(CORPUS_SUITES)


def resolve_selector(selector: Union[str, Sequence[str]]) -> list[str]:
    """
    Expand a comma-separated selector ("all" for every suite) in registry order.

    Raises:
        SuiteError: Empty selector or unknown suite name
    """
    names = [part.strip() for part in selector.split(",")] if isinstance(selector, str) else list(selector)
    names = [name for name in names if name]
    if not names:
        raise SuiteError(f"empty suite selector; choose from: all, {', '.join(SUITE_NAMES)}")
    if "all" in names:
        return list(SUITE_NAMES)
    unknown = [name for name in names if name not in SUITE_NAMES]
    if unknown:
        raise SuiteError(f"unknown suite(s) {', '.join(unknown)}; choose from: all, {', '.join(SUITE_NAMES)}")
    return [name for name in SUITE_NAMES if name in names]


def run_suites(
    selector: Union[str, Sequence[str]], cfg: VerifyConfig, corpus: Optional[Corpus] = None
) -> list[SuiteResult]:
    """Run the selected suites; results keep registry order."""
    names = resolve_selector(selector)
    corpus = corpus or cfg.corpus()
    results: list[SuiteResult] = []
    for name in names:
        with logfire.span(f"suite {name}"):
            if name in LEMMA_CHECKS:
                results.extend(LEMMA_CHECKS[name](cfg))
                continue
            outcome = CORPUS_SUITES[name](corpus, cfg)
            results.extend(outcome if isinstance(outcome, list) else [outcome])
    failed = [result for result in results if not result.passed]
    logfire.info(f"verify: {len(results) - len(failed)}/{len(results)} checks passed")
    return results
