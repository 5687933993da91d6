"""
Tests for the exact Kolmogorov solver, transport, the collision stepping and the
Picard / direct runs with their energy audits.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from models.simulation_experiment import DELTA_SPREAD_TOL, delta_spread
from schemas.report_schema import AuditReport
from services.collision import CrossSection
from services.corpus import initial_field
from services.errors import AuditError, GridError, ParameterError, StabilityError
from services.grid import GridSpec, PhaseField, fft_v, fft_x, forward
from services.multiplier import DEFAULT_DELTAS, MultiplierParams, PsiEvaluator
from services.norms import norm_hr_l2
from services.solver import (
    SolverConfig,
    Trajectory,
    energy_audit,
    kolmogorov_audit,
    kolmogorov_trajectory,
    mollify_initial,
    run,
    run_direct,
    run_picard,
    select_c0,
    solve_kolmogorov_exact,
    solve_kolmogorov_spectral,
    stability_bound,
    step_collision_linear,
    step_strang,
    step_transport,
    transport_eta,
)


@pytest.fixture
def solver_config(small_q, cs) -> SolverConfig:
    return SolverConfig(
        cs=cs,
        quadrature=small_q.config,
        multiplier=MultiplierParams(s=0.25, c0=0.5, delta=1e-2),
        dt=0.01,
        T=0.05,
        eps0=1e-3,
        deltas=(1e-2,),
    )


def _zero_trajectory(spec: GridSpec, count: int, spacing: float = 0.01) -> Trajectory:
    traj = Trajectory(scheme="picard")
    for k in range(count):
        traj.append(k * spacing, PhaseField.zeros(spec))
    return traj


class TestSolverConfig:
    def test_step_count(self, solver_config):
        assert solver_config.n_steps == 5
        assert solver_config.step == pytest.approx(0.01)

    def test_step_is_shrunk_to_fit(self, solver_config):
        cfg = solver_config.model_copy(update={"dt": 0.03})
        assert cfg.n_steps == 2
        assert cfg.step == pytest.approx(0.025)

    def test_orders_must_match(self):
        with pytest.raises(ValidationError):
            SolverConfig(cs=CrossSection(s=0.25), multiplier=MultiplierParams(s=0.75))

    def test_deltas_in_unit_interval(self, cs):
        with pytest.raises(ValidationError):
            SolverConfig(cs=cs, multiplier=MultiplierParams(s=0.25), deltas=(1e-2, 1.0))

    def test_with_c0(self, solver_config):
        assert solver_config.with_c0(0.125).multiplier.c0 == 0.125
        assert solver_config.multiplier.c0 == 0.5


class TestTrajectory:
    def test_times_must_increase(self, small_spec):
        traj = _zero_trajectory(small_spec, 2)
        with pytest.raises(ParameterError):
            traj.append(0.005, PhaseField.zeros(small_spec))

    def test_single_grid(self, small_spec):
        traj = _zero_trajectory(small_spec, 1)
        with pytest.raises(GridError):
            traj.append(1.0, PhaseField.zeros(GridSpec(Nx=8, Nv=64)))
        assert traj.spec == small_spec


class TestTransport:
    def test_nyquist_mode_at_rest(self, small_spec):
        eta = transport_eta(small_spec)
        assert eta[small_spec.Nx // 2] == 0.0
        np.testing.assert_array_equal(np.delete(eta, small_spec.Nx // 2), np.delete(small_spec.eta, small_spec.Nx // 2))

    def test_zero_step_is_identity(self, smooth_field):
        assert step_transport(smooth_field, 0.0) is smooth_field

    def test_isometry(self, smooth_field):
        moved = step_transport(smooth_field, 0.37)
        assert norm_hr_l2(moved, 0.0) == pytest.approx(norm_hr_l2(smooth_field, 0.0), rel=1e-12)

    def test_group_property(self, smooth_field):
        twice = step_transport(step_transport(smooth_field, 0.2), 0.3)
        once = step_transport(smooth_field, 0.5)
        np.testing.assert_allclose(twice.data, once.data, atol=1e-12)


class TestKolmogorov:
    def test_zero_time_is_the_datum(self, smooth_field):
        coef = solve_kolmogorov_spectral(smooth_field, 0.25, 0.0).coef
        np.testing.assert_allclose(coef, forward(smooth_field).coef, atol=1e-13)

    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_homogeneous_mode_decays_exactly(self, smooth_field, s):
        t = 0.6
        spec = smooth_field.spec
        coef = solve_kolmogorov_spectral(smooth_field, s, t).coef
        expected = forward(smooth_field).coef[0] * np.exp(-t * (1.0 + spec.xi**2) ** s)
        np.testing.assert_allclose(coef[0], expected, atol=1e-13)

    def test_half_order_closed_form(self):
        spec = GridSpec(Nx=64, Nv=128)
        rng = np.random.default_rng(11)
        field = PhaseField(spec=spec, data=rng.standard_normal(spec.shape))
        t = 0.5
        coef = solve_kolmogorov_spectral(field, 0.5, t).coef
        eta = transport_eta(spec)
        rows = rng.integers(0, spec.Nx, 1000)
        cols = rng.integers(0, spec.Nv, 1000)

        def antiderivative(z):
            return 0.5 * (z * np.sqrt(1.0 + z * z) + np.arcsinh(z))

        e, xi = eta[rows], spec.xi[cols]
        moving = e != 0.0
        rho = t * np.sqrt(1.0 + xi * xi)
        rho[moving] = (antiderivative(xi[moving] + t * e[moving]) - antiderivative(xi[moving])) / e[moving]
        shifted = fft_v(fft_x(field.data, spec) * np.exp(-1j * t * np.multiply.outer(eta, spec.v)), spec)
        expected = np.exp(-rho) * shifted[rows, cols]
        error = np.linalg.norm(coef[rows, cols] - expected)
        assert error <= 1e-10 * np.linalg.norm(expected)

    def test_decay_in_l2(self, smooth_field):
        later = solve_kolmogorov_exact(smooth_field, 0.5, 1.0)
        assert norm_hr_l2(later, 0.0) < norm_hr_l2(smooth_field, 0.0)

    @pytest.mark.parametrize("t, s", [(-0.1, 0.25), (0.5, 1.0), (0.5, 0.0)])
    def test_parameter_errors(self, smooth_field, t, s):
        with pytest.raises(ParameterError):
            solve_kolmogorov_spectral(smooth_field, s, t)

    def test_trajectory_needs_increasing_times(self, smooth_field):
        assert len(kolmogorov_trajectory(smooth_field, 0.25, [0.0, 0.5, 1.0])) == 3
        with pytest.raises(ParameterError):
            kolmogorov_trajectory(smooth_field, 0.25, [0.0, 0.5, 0.5])

    @pytest.mark.parametrize("s", [0.25, 0.75])
    def test_energy_identity(self, s):
        spec = GridSpec(Nx=16, Nv=64)
        data = np.outer(1.0 + np.cos(spec.x), np.exp(-0.5 * spec.v**2))
        p = PsiEvaluator(params=MultiplierParams(s=s, c0=0.5, delta=1e-2))
        report = kolmogorov_audit(PhaseField(spec=spec, data=data), s, p, [0.1, 0.3])
        assert isinstance(report, AuditReport)
        assert report.kind == "kolmogorov"
        assert report.residual <= 1e-6
        assert report.passed

    def test_audit_needs_room_for_stencil(self, smooth_field, psi_eval):
        with pytest.raises(AuditError):
            kolmogorov_audit(smooth_field, 0.25, psi_eval, [0.0, 1e-3])


class TestMollifier:
    def test_zero_time(self, smooth_field):
        assert mollify_initial(smooth_field, 0.0) is smooth_field

    def test_damps_at_least_the_zero_mode(self, smooth_field):
        t = 0.1
        smoothed = mollify_initial(smooth_field, t)
        assert norm_hr_l2(smoothed, 0.0) <= math.exp(-t) * norm_hr_l2(smooth_field, 0.0) * (1.0 + 1e-12)

    def test_negative_time(self, smooth_field):
        with pytest.raises(ParameterError):
            mollify_initial(smooth_field, -1.0)


class TestCollisionStep:
    def test_zero_state_stays_zero(self, small_spec, solver_config):
        zero = PhaseField.zeros(small_spec)
        out = step_collision_linear(zero, None, 0.01, solver_config)
        assert not np.any(out.data)

    def test_linear_step_dissipates(self, smooth_field, solver_config):
        out = step_collision_linear(smooth_field, PhaseField.zeros(smooth_field.spec), 0.01, solver_config)
        assert norm_hr_l2(out, 0.0) <= norm_hr_l2(smooth_field, 0.0) * (1.0 + 1e-10)

    def test_frozen_grid_must_match(self, smooth_field, solver_config):
        with pytest.raises(GridError):
            step_collision_linear(smooth_field, PhaseField.zeros(GridSpec(Nx=8, Nv=64)), 0.01, solver_config)

    def test_frozen_stage_count(self, smooth_field, solver_config):
        with pytest.raises(GridError):
            step_collision_linear(smooth_field, [smooth_field.data] * 3, 0.01, solver_config)

    def test_strang_is_second_order(self, smooth_field, solver_config):
        frozen = PhaseField.zeros(smooth_field.spec)
        horizon = 0.2
        steps = (0.1, 0.05, 0.025)

        def evolve(dt: float) -> np.ndarray:
            g = smooth_field
            for _ in range(int(round(horizon / dt))):
                g = step_strang(g, frozen, dt, solver_config)
            return g.data

        reference = evolve(steps[-1] / 8)
        errors = [np.linalg.norm(evolve(dt) - reference) for dt in steps]
        slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
        assert 1.8 <= slope <= 2.2

    def test_stability_bound(self, small_spec, solver_config):
        norm, dt_max = stability_bound(small_spec, solver_config)
        assert norm > 0.0
        assert dt_max == pytest.approx(solver_config.stability_constant / norm)
        assert solver_config.step <= dt_max


class TestRuns:
    def test_zero_datum_converges_at_once(self, smooth_field, solver_config):
        traj = run_picard(smooth_field, solver_config.model_copy(update={"eps0": 0.0}))
        assert traj.iterations == 1
        assert traj.converged
        assert len(traj.times) == 6
        assert all(not np.any(field.data) for field in traj.fields)

    def test_picard_matches_direct(self, smooth_field, solver_config):
        picard = run(smooth_field, solver_config)
        direct = run(smooth_field, solver_config.model_copy(update={"scheme": "direct"}))
        assert picard.scheme == "picard" and direct.scheme == "direct"
        assert picard.picard_deltas[-1] < solver_config.picard_tol
        np.testing.assert_allclose(picard.times, direct.times)
        final_p, final_d = picard.fields[-1].data, direct.fields[-1].data
        assert np.linalg.norm(final_p - final_d) <= 1e-6 * np.linalg.norm(final_d)

    def test_initial_datum_is_scaled(self, smooth_field, solver_config):
        traj = run_direct(smooth_field, solver_config)
        assert norm_hr_l2(traj.fields[0], solver_config.multiplier.r) == pytest.approx(solver_config.eps0)
        assert len(traj.reports) == len(traj.times)
        assert set(traj.reports[0].weighted_m) == {"0.01"}

    def test_snapshot_stride_keeps_final_time(self, smooth_field, solver_config):
        cfg = solver_config.model_copy(update={"snapshot_every": 2, "scheme": "direct"})
        traj = run(smooth_field, cfg)
        assert traj.times == pytest.approx([0.0, 0.02, 0.04, 0.05])

    def test_step_above_stability_bound(self, smooth_field, solver_config):
        cfg = solver_config.model_copy(update={"dt": 50.0, "T": 50.0})
        with pytest.raises(StabilityError):
            run(smooth_field, cfg)


class TestEnergyAudit:
    def test_needs_five_snapshots(self, small_spec, solver_config):
        with pytest.raises(AuditError, match="at least 5"):
            energy_audit(_zero_trajectory(small_spec, 3), solver_config)

    def test_needs_uniform_spacing(self, small_spec, solver_config):
        traj = _zero_trajectory(small_spec, 5)
        traj.append(0.07, PhaseField.zeros(small_spec))
        with pytest.raises(AuditError, match="uniformly"):
            energy_audit(traj, solver_config)

    def test_coarse_spacing(self, small_spec, solver_config):
        with pytest.raises(AuditError, match="spacing"):
            energy_audit(_zero_trajectory(small_spec, 5, spacing=0.5), solver_config)

    @pytest.mark.parametrize("kind", ["M", "G"])
    def test_zero_energy_passes(self, small_spec, solver_config, kind):
        report = energy_audit(_zero_trajectory(small_spec, 6), solver_config, kind)
        assert report.passed
        assert report.kind == kind
        assert report.fraction_nonneg == 1.0

    def test_unknown_weight(self, smooth_field, solver_config):
        traj = run_direct(smooth_field, solver_config)
        with pytest.raises(ParameterError):
            energy_audit(traj, solver_config, "H")

    def test_audit_of_small_run(self, smooth_field, solver_config):
        traj = run_direct(smooth_field, solver_config)
        report = energy_audit(traj, solver_config, "M")
        assert len(report.margins) == len(traj.times)
        assert report.c1 >= 0.0 and report.c1_tilde >= 0.0
        assert math.isfinite(report.residual)
        assert report.details["c0"] == solver_config.multiplier.c0

    @staticmethod
    def _synthetic_terms(monkeypatch, spike_at: float = -1.0) -> None:
        """E = e^t, unit ℒ-term and triple norm; the triple norm jumps to 100 at spike_at."""

        def terms(g, t, cfg, kind):
            triple = 100.0 if abs(t - spike_at) < 1e-9 else 1.0
            return math.exp(t), 0.0, 1.0, 0.0, triple

        monkeypatch.setattr("services.solver._energy_terms", terms)

    @pytest.mark.parametrize("count", [11, 21, 51, 101])
    def test_held_out_margins_of_smooth_energy(self, monkeypatch, small_spec, solver_config, count):
        self._synthetic_terms(monkeypatch)
        report = energy_audit(_zero_trajectory(small_spec, count, 1.0 / (count - 1)), solver_config)
        assert report.c1 == pytest.approx(0.5)
        assert report.details["held_out"] == list(range(1, count, 2))
        assert report.fraction_nonneg == 1.0
        assert report.passed

    def test_violation_on_held_out_snapshot_fails(self, monkeypatch, small_spec, solver_config):
        self._synthetic_terms(monkeypatch, spike_at=0.45)
        report = energy_audit(_zero_trajectory(small_spec, 21, 0.05), solver_config)
        assert report.c1 == pytest.approx(0.5)
        assert report.margins[9] < 0.0
        assert report.fraction_nonneg == pytest.approx(0.9)
        assert not report.passed

    def test_select_c0_on_zero_run(self, small_spec, solver_config):
        c0, report = select_c0(_zero_trajectory(small_spec, 6), solver_config)
        assert c0 == 0.5
        assert report.passed


@pytest.mark.slow
class TestReferenceRun:
    """Corpus datum on a 32x64 grid, s = 1/4, over the full default δ sweep."""

    @pytest.fixture(scope="class")
    def reference(self, small_q):
        spec = GridSpec(Nx=32, Nv=64)
        cfg = SolverConfig(
            cs=CrossSection(s=0.25),
            quadrature=small_q.config,
            multiplier=MultiplierParams(s=0.25, c0=0.1, delta=1e-2),
            dt=0.01,
            T=0.5,
            eps0=1e-3,
        )
        return cfg, run(initial_field("corpus", spec, seed=0), cfg)

    def test_sweep_includes_largest_delta(self, reference):
        cfg, _ = reference
        assert cfg.deltas == DEFAULT_DELTAS
        assert 1e-1 in cfg.deltas

    def test_weighted_norm_is_uniform_in_delta(self, reference):
        cfg, traj = reference
        assert delta_spread(traj, cfg.deltas) < DELTA_SPREAD_TOL

    def test_energy_audit_passes(self, reference):
        cfg, traj = reference
        report = energy_audit(traj, cfg, "M")
        assert report.c1 > 0.0
        assert report.fraction_nonneg >= 0.95
        assert report.passed

    def test_kolmogorov_control(self, reference):
        cfg, traj = reference
        times = [t for t in traj.times if t >= 2e-3]
        report = kolmogorov_audit(traj.fields[0], 0.25, cfg.psi, times)
        assert report.residual <= 1e-6
        assert report.passed
