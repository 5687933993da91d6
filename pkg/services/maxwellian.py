"""
Standard Maxwellian μ(v) = (2π)^{-1/2} e^{-v²/2}, its powers and their
closed-form unitary Fourier transforms, plus the kernel basis of the
linearized operator.
"""

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict

from services.errors import ParameterError
from services.grid import GridSpec

ProfileName = Literal["mu", "sqrt_mu", "mu_sq", "mu_quarter"]

PROFILE_POWERS: dict[str, float] = {
    "mu": 1.0,
    "sqrt_mu": 0.5,
    "mu_sq": 2.0,
    "mu_quarter": 0.25,
}


def mu_power(v: np.ndarray, alpha: float) -> np.ndarray:
    """μ(v)^α = (2π)^{-α/2} e^{-αv²/2}."""
    if alpha <= 0:
        raise ParameterError(f"Maxwellian power must be positive, got {alpha}")
    return (2.0 * math.pi) ** (-0.5 * alpha) * np.exp(-0.5 * alpha * np.square(v))


def mu_power_hat(xi: np.ndarray, alpha: float) -> np.ndarray:
    """Unitary transform of μ^α: (2π)^{-α/2} α^{-1/2} e^{-ξ²/(2α)}."""
    if alpha <= 0:
        raise ParameterError(f"Maxwellian power must be positive, got {alpha}")
    return (2.0 * math.pi) ** (-0.5 * alpha) / math.sqrt(alpha) * np.exp(-np.square(xi) / (2.0 * alpha))


def gaussian_hat(xi: np.ndarray, a: float) -> np.ndarray:
    """Unitary transform of e^{-a v²}."""
    return np.exp(-np.square(xi) / (4.0 * a)) / math.sqrt(2.0 * a)


def sample_profile(which: ProfileName, spec: GridSpec) -> np.ndarray:
    """
    Closed-form samples of an equilibrium profile on the v-grid.

    Raises:
        ParameterError: Unknown profile selector
    """
    if which not in PROFILE_POWERS:
        raise ParameterError(f"unknown profile '{which}', expected one of {sorted(PROFILE_POWERS)}")
    return mu_power(spec.v, PROFILE_POWERS[which])


def profile_hat(which: ProfileName, spec: GridSpec) -> np.ndarray:
    """Exact transform of a profile on the ξ-grid (FFT order)."""
    if which not in PROFILE_POWERS:
        raise ParameterError(f"unknown profile '{which}', expected one of {sorted(PROFILE_POWERS)}")
    return mu_power_hat(spec.xi, PROFILE_POWERS[which])


# ================================================
# Kernel of the linearized operator
# ================================================
class KernelBasis(BaseModel):
    """√μ, v√μ and v²√μ sampled on a grid, each L²-normalized."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: GridSpec
    sqrt_mu: np.ndarray
    v_sqrt_mu: np.ndarray
    v2_sqrt_mu: np.ndarray

    def as_rows(self) -> np.ndarray:
        return np.vstack([self.sqrt_mu, self.v_sqrt_mu, self.v2_sqrt_mu])

    def gram(self) -> np.ndarray:
        rows = self.as_rows()
        return self.spec.dv * rows @ rows.T


def _normalized(values: np.ndarray, dv: float) -> np.ndarray:
    return values / math.sqrt(dv * float(np.sum(np.square(values))))


def kernel_basis(spec: GridSpec) -> KernelBasis:
    v = spec.v
    root = mu_power(v, 0.5)
    return KernelBasis(
        spec=spec,
        sqrt_mu=_normalized(root, spec.dv),
        v_sqrt_mu=_normalized(v * root, spec.dv),
        v2_sqrt_mu=_normalized(np.square(v) * root, spec.dv),
    )
