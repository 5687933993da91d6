"""
Tests for the collision quadrature, the spectral collision operators and their
physical-space oracles.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from services.collision import (
    CollisionResult,
    CrossSection,
    QuadratureConfig,
    apply_calK_full,
    apply_calK_spectral,
    apply_K_oracle,
    apply_L,
    apply_T_oracle,
    apply_T_spectral,
    build_quadrature,
    check_cancellation,
    check_even_odd,
    convergence_report,
    graded_panels,
    grazing_tail_exponent,
    hermite_rule,
    linearized_eigenvalue,
    linearized_operator,
)
from services.errors import GridError, ParameterError, QuadratureError
from services.grid import GridSpec, PhaseField, fft_v, ifft_v
from services.maxwellian import mu_power, mu_power_hat
from services.multiplier import japanese


def _profiles(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    v = spec.v
    return np.exp(-0.25 * np.square(v - 1.0)), np.exp(-0.25 * np.square(v + 0.5))


class TestQuadrature:
    def test_theta_rule_is_symmetric(self, small_q):
        np.testing.assert_array_equal(small_q.theta, -small_q.theta[::-1])
        np.testing.assert_array_equal(small_q.weights, small_q.weights[::-1])
        assert np.min(np.abs(small_q.theta)) >= small_q.eps

    def test_theta_rule_covers_the_interval(self, small_q):
        # Twice the length of [ε, π/2]
        assert np.sum(small_q.weights) == pytest.approx(2.0 * (0.5 * math.pi - small_q.eps), rel=1e-12)

    def test_graded_panels_integrate_power(self):
        theta, weight = graded_panels(1e-3, 0.5 * math.pi, 12, 1.5, 8)
        exact = 2.0 * (math.sqrt(0.5 * math.pi) - math.sqrt(1e-3))
        assert np.sum(weight * theta**-0.5) == pytest.approx(exact, rel=1e-4)

    def test_graded_panels_reject_bad_range(self):
        with pytest.raises(QuadratureError):
            graded_panels(0.0, 1.0, 4, 1.5, 4)

    def test_refine_halves_cutoff(self, small_q):
        fine = small_q.config.refine()
        assert fine.eps == pytest.approx(0.5 * small_q.eps)
        assert fine.panels == 2 * small_q.config.panels
        assert fine.hermite_order == 36

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            QuadratureConfig(eps=0.0)

    def test_build_is_cached(self, small_q):
        assert build_quadrature(small_q.config) is small_q

    @pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0])
    def test_hermite_rule_mass(self, small_q, alpha):
        _, weights = hermite_rule(small_q, alpha)
        # ∫ FT(μ^α)(u) du = √(2π) μ^α(0)
        assert np.sum(weights) == pytest.approx(math.sqrt(2.0 * math.pi) * (2.0 * math.pi) ** (-0.5 * alpha))

    def test_hermite_rule_needs_alpha_above_quarter(self, small_q):
        with pytest.raises(ParameterError):
            hermite_rule(small_q, 0.25)

    def test_cross_section(self):
        cs = CrossSection(s=0.25)
        theta = np.array([0.1, 0.7])
        np.testing.assert_allclose(cs.beta(theta), cs.beta(-theta))
        assert cs.beta(np.array(0.5 * math.pi)) == pytest.approx(0.0, abs=1e-15)


class TestSpectralOperators:
    def test_calK_matches_physical_oracle(self, small_spec, small_q, cs):
        f, g = _profiles(small_spec)
        spectral = apply_calK_spectral(fft_v(f, small_spec), fft_v(g, small_spec), small_spec, small_q, cs)
        oracle = fft_v(apply_T_oracle(f, g, 0.5, small_spec, small_q, cs), small_spec)
        assert np.linalg.norm(spectral - oracle) <= 1e-4 * np.linalg.norm(oracle)

    def test_T_matches_physical_oracle(self, small_spec, small_q, cs):
        f, g = _profiles(small_spec)
        spectral = apply_T_spectral(fft_v(f, small_spec), fft_v(g, small_spec), 1.0, small_spec, small_q, cs)
        oracle = fft_v(apply_T_oracle(f, g, 1.0, small_spec, small_q, cs), small_spec)
        assert np.linalg.norm(spectral - oracle) <= 1e-4 * np.linalg.norm(oracle)

    def test_equilibrium_is_annihilated(self, line_spec, small_q, cs):
        root = mu_power_hat(line_spec.xi, 0.5)
        values = apply_calK_spectral(root, root, line_spec, small_q, cs)
        scale = np.sum(small_q.beta_weights(cs)) * np.max(root) ** 2
        assert np.max(np.abs(values)) <= 1e-8 * scale

    def test_calK_is_bilinear(self, small_spec, small_q, cs):
        f, g = _profiles(small_spec)
        h = f * small_spec.v
        fh, gh, hh = (fft_v(line, small_spec) for line in (f, g, h))
        combined = apply_calK_spectral(2.0 * fh - 0.5 * hh, gh, small_spec, small_q, cs)
        separate = 2.0 * apply_calK_spectral(fh, gh, small_spec, small_q, cs) - 0.5 * apply_calK_spectral(
            hh, gh, small_spec, small_q, cs
        )
        np.testing.assert_allclose(combined, separate, atol=1e-12 * np.max(np.abs(separate)))

    def test_error_estimate(self, small_spec, small_q, cs):
        f, g = _profiles(small_spec)
        result = apply_calK_spectral(
            fft_v(f, small_spec), fft_v(g, small_spec), small_spec, small_q, cs, with_error=True, tol=1.0
        )
        assert isinstance(result, CollisionResult)
        assert result.converged
        assert 0.0 <= result.error_bound < 1.0

    def test_full_field_matches_line_by_line(self, smooth_field, small_q, cs):
        spec = smooth_field.spec
        full = apply_calK_full(smooth_field, smooth_field, small_q, cs)
        line = smooth_field.data[3]
        expected = ifft_v(apply_calK_spectral(fft_v(line, spec), fft_v(line, spec), spec, small_q, cs), spec).real
        np.testing.assert_allclose(full.data[3], expected, atol=1e-10)

    def test_full_field_grid_mismatch(self, smooth_field, small_q, cs):
        other = PhaseField.zeros(GridSpec(Nx=8, Nv=64))
        with pytest.raises(GridError):
            apply_calK_full(smooth_field, other, small_q, cs)

    def test_spectral_line_length(self, small_spec, small_q, cs):
        with pytest.raises(GridError):
            apply_T_spectral(np.zeros(16), np.zeros(16), 0.5, small_spec, small_q, cs)

    def test_oracle_line_length(self, small_spec, small_q, cs):
        with pytest.raises(GridError):
            apply_K_oracle(np.zeros(16), np.zeros(16), small_spec, small_q, cs)


class TestPhysicalOracle:
    """Direct-summation K on 64-point v-lines against the structural identities."""

    @staticmethod
    def _narrow(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
        v = spec.v
        return np.exp(-np.square(v - 0.5)), np.exp(-np.square(v + 0.5)) * (1.0 + 0.3 * v)

    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_maxwellian_is_an_equilibrium(self, line_spec, small_q, s):
        mu = mu_power(line_spec.v, 1.0)
        out = apply_K_oracle(mu, mu, line_spec, small_q, CrossSection(s=s))
        assert np.linalg.norm(out) <= 1e-6 * np.linalg.norm(mu)

    def test_zero_first_argument(self, line_spec, small_q, cs):
        _, g = self._narrow(line_spec)
        out = apply_K_oracle(np.zeros(line_spec.Nv), g, line_spec, small_q, cs)
        assert not np.any(out)

    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_mass_is_conserved(self, line_spec, small_q, s):
        f, g = self._narrow(line_spec)
        out = apply_K_oracle(f, g, line_spec, small_q, CrossSection(s=s))
        assert abs(line_spec.dv * np.sum(out)) <= 1e-8 * line_spec.dv * np.sum(np.abs(out))

    def test_half_weight_reproduces_calK(self, line_spec, small_q, cs):
        f, g = self._narrow(line_spec)
        fh, gh = fft_v(f, line_spec), fft_v(g, line_spec)
        weighted = apply_T_spectral(fh, gh, 0.5, line_spec, small_q, cs)
        collided = apply_calK_spectral(fh, gh, line_spec, small_q, cs)
        assert np.linalg.norm(weighted - collided) <= 1e-10 * np.linalg.norm(collided)

    @pytest.mark.slow
    def test_cutoff_halving_at_default_quadrature(self, line_spec, cs):
        f, g = self._narrow(line_spec)
        q = build_quadrature(QuadratureConfig())
        report = convergence_report("calK", [fft_v(f, line_spec), fft_v(g, line_spec)], line_spec, q, cs, tol=1e-5)
        assert report.eps == 1e-4
        assert report.passed, report.delta_refine

    def test_full_field_is_a_convolution_in_eta(self, line_spec, small_q, cs):
        x = line_spec.x
        f_line, g_line = self._narrow(line_spec)
        f = PhaseField(spec=line_spec, data=np.outer(1.0 + 0.5 * np.cos(x), f_line))
        g = PhaseField(spec=line_spec, data=np.outer(1.0 + 0.3 * np.sin(2.0 * x), g_line))
        f_eta = np.fft.fft(f.data, axis=0)
        g_eta = np.fft.fft(g.data, axis=0)
        nx = line_spec.Nx

        def collide(a: np.ndarray, b: np.ndarray) -> np.ndarray:
            spectral = apply_calK_spectral(fft_v(a, line_spec), fft_v(b, line_spec), line_spec, small_q, cs)
            return ifft_v(spectral, line_spec)

        shifts = np.arange(nx)
        expected_eta = np.stack([collide(f_eta, g_eta[(n - shifts) % nx]).sum(axis=0) / nx for n in range(nx)])
        expected = np.fft.ifft(expected_eta, axis=0).real
        full = apply_calK_full(f, g, small_q, cs)
        np.testing.assert_allclose(full.data, expected, atol=1e-10 * np.max(np.abs(expected)))


class TestLinearizedOperator:
    @pytest.fixture(scope="class")
    def operator(self, line_spec, small_q, cs):
        return linearized_operator(line_spec, small_q.config, cs)

    @pytest.mark.parametrize("power", [0, 2])
    def test_kernel(self, operator, line_spec, power):
        g = line_spec.v**power * mu_power(line_spec.v, 0.5)
        residual = operator.apply_physical(g)
        assert np.linalg.norm(residual) <= 1e-6 * operator.eigenvalue * np.linalg.norm(g)

    def test_momentum_eigenfunction(self, operator, line_spec):
        g = line_spec.v * mu_power(line_spec.v, 0.5)
        np.testing.assert_allclose(operator.apply_physical(g), operator.eigenvalue * g, atol=1e-6 * operator.eigenvalue)

    def test_eigenvalue_matches_quadrature(self, operator, small_q, cs):
        assert operator.eigenvalue == pytest.approx(linearized_eigenvalue(small_q, cs))
        assert operator.eigenvalue > 0.0

    def test_spectral_and_physical_agree(self, operator, line_spec, small_q, cs):
        g = np.exp(-0.25 * np.square(line_spec.v - 1.0))
        spectral = apply_L(fft_v(g, line_spec), line_spec, small_q, cs)
        np.testing.assert_allclose(fft_v(operator.apply_physical(g), line_spec), spectral, atol=1e-10)

    def test_nonnegative_on_smooth_lines(self, operator, line_spec):
        rng = np.random.default_rng(0)
        weight = np.exp(-0.25 * np.square(line_spec.v))
        for _ in range(5):
            g = weight * np.polynomial.hermite_e.hermeval(line_spec.v, rng.standard_normal(5))
            assert line_spec.dv * g @ operator.apply_physical(g) >= -1e-8 * line_spec.dv * g @ g


class TestStructuralChecks:
    def test_cancellation_identity(self, small_spec, small_q):
        f, g = _profiles(small_spec)
        report = check_cancellation(f, g, small_spec, small_q)
        assert report.passed, report.sup_ratio
        assert report.n_samples > 0

    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_even_odd_reduction(self, small_spec, small_q, s):
        f, g = _profiles(small_spec)
        h = g * small_spec.v

        def multiplier(xi):
            return 1.0 / (1e-2 + np.exp(-0.5 * japanese(np.asarray(xi)) ** 0.5))

        report = check_even_odd(f, g, h, multiplier, small_spec, small_q, CrossSection(s=s))
        assert report.passed, report.sup_ratio

    @pytest.mark.slow
    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_grazing_tail_slope(self, small_spec, s):
        f, g = _profiles(small_spec)
        report = grazing_tail_exponent(f, g, small_spec, CrossSection(s=s))
        assert report.passed, report.details
        # (1 - 2s) below the symmetric branch, (2 - 2s) from s = 1/2 on
        assert report.params["expected"] == pytest.approx((2.0 if s >= 0.5 else 1.0) - 2.0 * s)

    def test_grazing_tail_needs_three_cutoffs(self, small_spec):
        f, g = _profiles(small_spec)
        with pytest.raises(ParameterError):
            grazing_tail_exponent(f, g, small_spec, CrossSection(s=0.25), eps_list=(1e-2, 1e-3))

    def test_convergence_report_linear(self, small_spec, small_q, cs):
        f, _ = _profiles(small_spec)
        report = convergence_report("L", [fft_v(f, small_spec)], small_spec, small_q, cs, tol=1.0)
        assert report.op == "L"
        assert report.eps == small_q.eps
        assert report.passed

    def test_convergence_report_unknown_operator(self, small_spec, small_q, cs):
        with pytest.raises(ParameterError):
            convergence_report("Q", [], small_spec, small_q, cs)
