"""
Tests for grids, unitary transforms and off-grid evaluation.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from services.errors import GridError
from services.grid import (
    GridSpec,
    PhaseField,
    SpectralField,
    eval_offgrid_v,
    fft_v,
    forward,
    interpolate_v,
    inverse,
    require_same_grid,
)
from services.maxwellian import gaussian_hat


class TestGridSpec:
    def test_defaults(self):
        spec = GridSpec()
        assert spec.shape == (64, 128)
        assert spec.Lv == 10.0
        assert np.isclose(spec.d_eta, 1.0)
        assert np.isclose(spec.d_xi, np.pi / 10.0)

    def test_origin_sits_at_half_index(self):
        spec = GridSpec(Nx=16, Nv=32)
        assert spec.x[spec.Nx // 2] == pytest.approx(0.0, abs=1e-14)
        assert spec.v[spec.Nv // 2] == pytest.approx(0.0, abs=1e-14)

    def test_frequencies_in_fft_order(self):
        spec = GridSpec(Nx=8, Nv=32)
        assert spec.eta[0] == 0.0
        assert spec.eta[1] == pytest.approx(spec.d_eta)
        assert spec.xi[-1] == pytest.approx(-spec.d_xi)

    @pytest.mark.parametrize("size", [4, 12, 48, 0])
    def test_rejects_bad_sizes(self, size):
        with pytest.raises(ValidationError):
            GridSpec(Nx=size, Nv=32)

    def test_rejects_small_velocity_box(self):
        with pytest.raises(ValidationError):
            GridSpec(Nx=8, Nv=32, Lv=6.0)

    def test_is_hashable_and_frozen(self):
        spec = GridSpec(Nx=8, Nv=32)
        assert hash(spec) == hash(GridSpec(Nx=8, Nv=32))
        with pytest.raises(ValidationError):
            spec.Nx = 16


class TestFields:
    def test_rejects_complex_data(self, small_spec):
        with pytest.raises(GridError):
            PhaseField(spec=small_spec, data=np.ones(small_spec.shape, dtype=complex))

    def test_rejects_non_finite_data(self, small_spec):
        data = np.zeros(small_spec.shape)
        data[1, 2] = np.nan
        with pytest.raises(GridError, match="non-finite"):
            PhaseField(spec=small_spec, data=data)

    def test_rejects_shape_mismatch(self, small_spec):
        with pytest.raises(GridError):
            PhaseField(spec=small_spec, data=np.zeros((8, 16)))

    def test_spectral_rejects_non_finite(self, small_spec):
        coef = np.zeros(small_spec.shape, dtype=complex)
        coef[0, 0] = np.inf
        with pytest.raises(GridError):
            SpectralField(spec=small_spec, coef=coef)

    def test_require_same_grid(self, small_spec):
        a = PhaseField.zeros(small_spec)
        b = PhaseField.zeros(GridSpec(Nx=8, Nv=64))
        assert require_same_grid(a, a) == small_spec
        with pytest.raises(GridError):
            require_same_grid(a, b)


class TestTransforms:
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_plancherel_is_exact(self, seed):
        spec = GridSpec(Nx=8, Nv=32)
        data = np.random.default_rng(seed).standard_normal(spec.shape)
        field = PhaseField(spec=spec, data=data)
        coef = forward(field).coef
        physical = spec.dx * spec.dv * np.sum(data**2)
        dual = spec.d_eta * spec.d_xi * np.sum(np.abs(coef) ** 2)
        assert dual == pytest.approx(physical, rel=1e-12)

    def test_inverse_recovers_field(self, smooth_field):
        back = inverse(forward(smooth_field))
        np.testing.assert_allclose(back.data, smooth_field.data, atol=1e-13)

    def test_gaussian_transform_matches_closed_form(self, line_spec):
        samples = np.exp(-0.25 * np.square(line_spec.v))
        np.testing.assert_allclose(fft_v(samples, line_spec), gaussian_hat(line_spec.xi, 0.25), atol=1e-10)

    def test_constant_in_x_lives_on_zero_mode(self, small_spec):
        data = np.broadcast_to(np.exp(-0.5 * np.square(small_spec.v)), small_spec.shape)
        coef = forward(PhaseField(spec=small_spec, data=data)).coef
        assert np.max(np.abs(coef[1:])) < 1e-13 * np.max(np.abs(coef[0]))


class TestOffGrid:
    def test_offgrid_transform_of_gaussian(self, line_spec):
        line = fft_v(np.exp(-0.25 * np.square(line_spec.v)), line_spec)
        points = np.array([-3.7, -0.31, 0.0, 0.123, 2.5, 4.0])
        values = eval_offgrid_v(line, points, line_spec)
        np.testing.assert_allclose(values, gaussian_hat(points, 0.25), atol=1e-10)

    def test_offgrid_scalar_returns_complex(self, line_spec):
        line = fft_v(np.exp(-0.25 * np.square(line_spec.v)), line_spec)
        value = eval_offgrid_v(line, 0.7, line_spec)
        assert isinstance(value, complex)
        assert value.real == pytest.approx(float(gaussian_hat(np.array(0.7), 0.25)), abs=1e-10)

    def test_interpolation_reproduces_grid_samples(self, line_spec):
        samples = np.random.default_rng(3).standard_normal(line_spec.Nv)
        np.testing.assert_allclose(interpolate_v(samples, line_spec.v, line_spec), samples, atol=1e-12)

    def test_interpolation_of_gaussian_between_nodes(self, line_spec):
        samples = np.exp(-0.5 * np.square(line_spec.v))
        points = line_spec.v[20:40] + 0.5 * line_spec.dv
        np.testing.assert_allclose(interpolate_v(samples, points, line_spec), np.exp(-0.5 * points**2), atol=1e-10)
