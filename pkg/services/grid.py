"""
Phase-space grids and unitary discrete Fourier transforms.

The box [-Lx, Lx) x [-Lv, Lv) is sampled uniformly with x_i = -Lx + i*dx and
v_j = -Lv + j*dv. Spectral coefficients approximate the unitary transform

    ĝ(η, ξ) = (2π)^-1 ∫∫ g(x, v) e^{-i(xη + vξ)} dx dv

on the dual grid η_k = πk/Lx, ξ_m = πm/Lv, stored in FFT index order. The
discrete norms ||g||² = dx·dv·Σ|g|² and ||ĝ||² = dη·dξ·Σ|ĝ|² agree exactly.

Example:
    spec = GridSpec(Nx=32, Nv=64)
    sf = forward(PhaseField(spec=spec, data=np.ones(spec.shape)))
"""

import math
from functools import lru_cache
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from services.errors import GridError

SQRT_2PI = math.sqrt(2.0 * math.pi)


# ================================================
# Grid specification
# ================================================
class GridSpec(BaseModel):
    """Uniform periodic grid on the truncated phase-space box."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    Nx: int = Field(default=64, description="Number of x points")
    Nv: int = Field(default=128, description="Number of v points")
    Lx: float = Field(default=math.pi, gt=0.0, description="Half-width of the x box")
    Lv: float = Field(default=10.0, ge=8.0, description="Half-width of the v box")

    @field_validator("Nx", "Nv")
    @classmethod
    def _power_of_two(cls, value: int) -> int:
        if value < 8 or value & (value - 1):
            raise ValueError(f"grid sizes must be powers of two >= 8, got {value}")
        return value

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Nx, self.Nv)

    @property
    def dx(self) -> float:
        return 2.0 * self.Lx / self.Nx

    @property
    def dv(self) -> float:
        return 2.0 * self.Lv / self.Nv

    @property
    def d_eta(self) -> float:
        return math.pi / self.Lx

    @property
    def d_xi(self) -> float:
        return math.pi / self.Lv

    @property
    def x(self) -> np.ndarray:
        return -self.Lx + self.dx * np.arange(self.Nx)

    @property
    def v(self) -> np.ndarray:
        return -self.Lv + self.dv * np.arange(self.Nv)

    @property
    def eta(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.Nx, d=self.dx)

    @property
    def xi(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.Nv, d=self.dv)

    def dual_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(η, ξ) arrays broadcast to the coefficient shape."""
        return np.meshgrid(self.eta, self.xi, indexing="ij")

    @property
    def vv(self) -> np.ndarray:
        """v broadcast against the x axis."""
        return np.broadcast_to(self.v, self.shape)


# ================================================
# Fields
# ================================================
class PhaseField(BaseModel):
    """Real perturbation g(x_i, v_j) sampled on a GridSpec."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: GridSpec
    data: np.ndarray

    @field_validator("data", mode="before")
    @classmethod
    def _as_real_array(cls, value: Any) -> np.ndarray:
        array = np.asarray(value)
        if np.iscomplexobj(array):
            raise GridError("PhaseField data must be real; take the real part explicitly")
        return np.array(array, dtype=np.float64)

    @model_validator(mode="after")
    def _check_shape_and_values(self) -> "PhaseField":
        if self.data.shape != self.spec.shape:
            raise GridError(f"field shape {self.data.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(self.data)):
            bad = int(np.size(self.data) - np.count_nonzero(np.isfinite(self.data)))
            raise GridError(f"field has {bad} non-finite entries")
        return self

    @classmethod
    def zeros(cls, spec: GridSpec) -> "PhaseField":
        return cls(spec=spec, data=np.zeros(spec.shape))

    def scaled(self, factor: float) -> "PhaseField":
        return PhaseField(spec=self.spec, data=factor * self.data)

    def with_data(self, data: np.ndarray) -> "PhaseField":
        return PhaseField(spec=self.spec, data=data)


class SpectralField(BaseModel):
    """Complex coefficients ĝ(η_k, ξ_m) in FFT index order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: GridSpec
    coef: np.ndarray

    @field_validator("coef", mode="before")
    @classmethod
    def _as_complex_array(cls, value: Any) -> np.ndarray:
        return np.array(value, dtype=np.complex128)

    @model_validator(mode="after")
    def _check_shape_and_values(self) -> "SpectralField":
        if self.coef.shape != self.spec.shape:
            raise GridError(f"coefficient shape {self.coef.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(self.coef)):
            raise GridError("spectral field has non-finite coefficients")
        return self


def require_same_grid(*fields: Any) -> GridSpec:
    """Return the shared GridSpec or raise GridError."""
    specs = [field.spec for field in fields]
    for spec in specs[1:]:
        if spec != specs[0]:
            raise GridError(f"grid mismatch: {spec} vs {specs[0]}")
    return specs[0]


# ================================================
# Transforms
# ================================================
@lru_cache(maxsize=32)
def _alternating(n: int) -> np.ndarray:
    # Phase of the box offset: e^{iLπk/L} = (-1)^k for FFT index k.
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    signs = np.where(k % 2 == 0, 1.0, -1.0)
    signs.setflags(write=False)
    return signs


def fft_x(data: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Unitary transform in x along axis 0: (x, v) -> (η, v)."""
    signs = _alternating(spec.Nx)[:, None]
    return np.fft.fft(data, axis=0) * (signs * (spec.dx / SQRT_2PI))


def ifft_x(coef: np.ndarray, spec: GridSpec) -> np.ndarray:
    signs = _alternating(spec.Nx)[:, None]
    return np.fft.ifft(coef * signs, axis=0) * (spec.Nx * spec.d_eta / SQRT_2PI)


def fft_v(data: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Unitary transform in v along the last axis: (..., v) -> (..., ξ)."""
    signs = _alternating(spec.Nv)
    return np.fft.fft(data, axis=-1) * (signs * (spec.dv / SQRT_2PI))


def ifft_v(coef: np.ndarray, spec: GridSpec) -> np.ndarray:
    signs = _alternating(spec.Nv)
    return np.fft.ifft(coef * signs, axis=-1) * (spec.Nv * spec.d_xi / SQRT_2PI)


def fft_xv(data: np.ndarray, spec: GridSpec) -> np.ndarray:
    return fft_v(fft_x(data, spec), spec)


def ifft_xv(coef: np.ndarray, spec: GridSpec) -> np.ndarray:
    return ifft_v(ifft_x(coef, spec), spec)


def forward(field: PhaseField) -> SpectralField:
    """
    Unitary 2D transform of a phase-space field.

    Raises:
        GridError: If the field holds non-finite values
    """
    if not np.all(np.isfinite(field.data)):
        raise GridError("forward transform of a non-finite field")
    return SpectralField(spec=field.spec, coef=fft_xv(field.data, field.spec))


def inverse_array(coef: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Complex physical samples of a coefficient array."""
    if not np.all(np.isfinite(coef)):
        raise GridError("inverse transform of non-finite coefficients")
    return ifft_xv(coef, spec)


def inverse(sf: SpectralField) -> PhaseField:
    """Physical field of a spectral field; the imaginary part is discarded."""
    return PhaseField(spec=sf.spec, data=inverse_array(sf.coef, sf.spec).real)


# ================================================
# Off-grid evaluation
# ================================================
def offgrid_matrix(points: np.ndarray, spec: GridSpec) -> np.ndarray:
    """
    Rows mapping v-samples to the continuous transform at arbitrary ξ.

    The product with a sample vector is the Riemann sum
    (dv/√2π) Σ_j g_j e^{-i v_j ξ}, periodic in ξ with period 2π/dv.
    """
    points = np.asarray(points, dtype=np.float64)
    return np.exp(-1j * np.multiply.outer(points, spec.v)) * (spec.dv / SQRT_2PI)


def eval_offgrid_v(line: np.ndarray, xi_star: Any, spec: GridSpec) -> Any:
    """
    Trigonometric extension of a spectral line in ξ, evaluated at ξ*.

    Args:
        line: Coefficients ĝ(ξ_m) of one v-line, FFT order
        xi_star: Scalar or array of real frequencies
        spec: Grid the line lives on

    Returns:
        Complex value(s) with the shape of xi_star
    """
    samples = ifft_v(np.asarray(line, dtype=np.complex128), spec)
    xi = np.asarray(xi_star, dtype=np.float64)
    values = offgrid_matrix(xi.ravel(), spec) @ samples
    if xi.ndim == 0:
        return complex(values[0])
    return values.reshape(xi.shape)


def interpolation_matrix(points: np.ndarray, spec: GridSpec) -> np.ndarray:
    """
    Rows of the periodic band-limited interpolant on the v-grid.

    Row entries are (1/N)[sin((N/2 - 1/2)φ)/sin(φ/2) + cos(Nφ/2)] with
    φ = π(v - v_j)/Lv; the Nyquist mode is split symmetrically so real samples
    interpolate to real values and grid points reproduce samples exactly.
    """
    points = np.asarray(points, dtype=np.float64)
    n = spec.Nv
    phi = np.pi * np.subtract.outer(points, spec.v) / spec.Lv
    half = np.sin(0.5 * phi)
    near = np.abs(half) < 1e-12
    # The kernel tends to N - 1 at every multiple of 2π since N - 1 is odd.
    dirichlet = np.where(near, n - 1.0, np.sin((0.5 * n - 0.5) * phi) / np.where(near, 1.0, half))
    return (dirichlet + np.cos(0.5 * n * phi)) / n


def interpolate_v(samples: np.ndarray, points: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Band-limited interpolant of v-samples (last axis) at arbitrary points."""
    return samples @ interpolation_matrix(points, spec).T
