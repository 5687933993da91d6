"""
Shared fixtures: small grids and a coarse collision quadrature so that the
operator tensors build in well under a second.
"""

import logfire
import numpy as np
import pytest

from services.collision import CrossSection, QuadratureConfig, build_quadrature
from services.grid import GridSpec, PhaseField
from services.multiplier import MultiplierParams, PsiEvaluator

logfire.configure(send_to_logfire=False, console=False)

SMALL_QUADRATURE = QuadratureConfig(eps=1e-3, panels=8, order=6, hermite_order=24)


@pytest.fixture(scope="session")
def small_spec() -> GridSpec:
    return GridSpec(Nx=8, Nv=32)


@pytest.fixture(scope="session")
def line_spec() -> GridSpec:
    return GridSpec(Nx=8, Nv=64)


@pytest.fixture(scope="session")
def small_q():
    return build_quadrature(SMALL_QUADRATURE)


@pytest.fixture(scope="session")
def cs() -> CrossSection:
    return CrossSection(s=0.25)


@pytest.fixture(scope="session")
def psi_eval() -> PsiEvaluator:
    return PsiEvaluator(params=MultiplierParams(s=0.25, c0=0.5, delta=1e-2, r=1.0))


@pytest.fixture
def smooth_field(small_spec: GridSpec) -> PhaseField:
    """(1 + cos x/2) e^{-(v-1)²/4}, smooth in both variables and not even in v."""
    x, v = small_spec.x, small_spec.v
    data = np.outer(1.0 + 0.5 * np.cos(x), np.exp(-0.25 * np.square(v - 1.0)))
    return PhaseField(spec=small_spec, data=data)
