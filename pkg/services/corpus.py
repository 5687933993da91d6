"""
Seeded corpus of band-limited random fields for the ratio suites.

Each field is Re Σ a_{kn} e^{iη_k x} φ_n(v) over |k| ≤ 2, n ≤ 4, with Hermite
functions φ_n(v) = H_n(v/√2) e^{−v²/4} / (2ⁿ n! √(2π))^{1/2} and complex Gaussian
amplitudes scaled by ⟨η_k⟩^{−2}(2n + 2)^{−1}. The same seed yields the same
continuous functions on every grid.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import eval_hermite, gammaln

from config.settings import settings
from services.errors import ParameterError
from services.grid import GridSpec, PhaseField
from services.multiplier import japanese

MAX_WAVENUMBER = 2
MAX_DEGREE = 4


def hermite_function(n: int, v: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite function of degree n for the weight e^{−v²/2}."""
    log_norm = 0.5 * (n * math.log(2.0) + gammaln(n + 1.0) + 0.5 * math.log(2.0 * math.pi))
    return eval_hermite(n, v / math.sqrt(2.0)) * np.exp(-0.25 * np.square(v) - log_norm)


def _amplitudes(seed_sequence: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed_sequence)
    k = np.arange(-MAX_WAVENUMBER, MAX_WAVENUMBER + 1)
    n = np.arange(MAX_DEGREE + 1)
    scale = japanese(k.astype(np.float64))[:, None] ** -2.0 / (2.0 * n[None, :] + 2.0)
    shape = (k.size, n.size)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_field(amplitudes: np.ndarray, spec: GridSpec) -> PhaseField:
    """Evaluate one corpus field on a grid; wavenumber k maps to η = k·π/Lx."""
    k = np.arange(-MAX_WAVENUMBER, MAX_WAVENUMBER + 1)
    eta = k * spec.d_eta
    waves = np.exp(1j * np.multiply.outer(spec.x, eta))
    basis = np.stack([hermite_function(n, spec.v) for n in range(MAX_DEGREE + 1)])
    return PhaseField(spec=spec, data=np.real(waves @ amplitudes @ basis))


class Corpus(BaseModel):
    """Seed-deterministic family of fields, materialized per grid on demand."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(ge=0)
    size: int = Field(ge=1)
    workers: Optional[int] = None

    def fields(self, spec: GridSpec, count: Optional[int] = None) -> list[PhaseField]:
        return list(_materialize(self.seed, count or self.size, spec, self.workers or settings.WORKERS))

    def pairs(self, spec: GridSpec) -> list[tuple[PhaseField, PhaseField]]:
        items = self.fields(spec, 2 * self.size)
        return list(zip(items[0::2], items[1::2]))

    def triples(self, spec: GridSpec) -> list[tuple[PhaseField, PhaseField, PhaseField]]:
        items = self.fields(spec, 3 * self.size)
        return list(zip(items[0::3], items[1::3], items[2::3]))


@lru_cache(maxsize=32)
def _materialize(seed: int, count: int, spec: GridSpec, workers: int) -> tuple[PhaseField, ...]:
    children = np.random.SeedSequence(seed).spawn(count)
    amplitudes = [_amplitudes(child) for child in children]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return tuple(pool.map(lambda a: sample_field(a, spec), amplitudes))


def make_corpus(spec: GridSpec, n: int, seed: int, workers: Optional[int] = None) -> list[PhaseField]:
    """n seeded fields on one grid."""
    return Corpus(seed=seed, size=n, workers=workers).fields(spec)


InitialKind = Literal["corpus", "hermite", "point"]


def initial_field(
    kind: InitialKind,
    spec: GridSpec,
    seed: int = 0,
    amplitude: float = 1.0,
    wavenumber: int = 1,
    degree: int = 2,
) -> PhaseField:
    """
    Initial datum on a grid.

    "corpus" is the first corpus field of the seed, "hermite" is
    cos(k·Δη·x)·φ_n(v), and "point" is the lattice unit mass at (0, 0), whose
    transform has constant modulus. Zero amplitude gives the zero field.
    """
    if amplitude == 0.0:
        return PhaseField.zeros(spec)
    if kind == "corpus":
        field = make_corpus(spec, 1, seed)[0]
    elif kind == "hermite":
        if degree < 0:
            raise ParameterError(f"Hermite degree must be nonnegative, got {degree}")
        wave = np.cos(wavenumber * spec.d_eta * spec.x)
        field = PhaseField(spec=spec, data=np.outer(wave, hermite_function(degree, spec.v)))
    elif kind == "point":
        data = np.zeros(spec.shape)
        data[spec.Nx // 2, spec.Nv // 2] = 1.0 / (spec.dx * spec.dv)
        field = PhaseField(spec=spec, data=data)
    else:
        raise ParameterError(f"unknown initial datum '{kind}'")
    return field.scaled(amplitude)
