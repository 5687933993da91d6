"""
Error hierarchy for the solver and verification harness.

Handlers translate these into process exit codes; services raise them directly.
"""

from typing import Optional


class KacError(Exception):
    """Base class for every failure raised by the numerical services."""


class ParameterError(KacError, ValueError):
    """An argument lies outside the domain of an operation (e.g. t < 0)."""


class GridError(KacError):
    """Grid mismatch, wrong field shape or non-finite field values."""


class QuadratureError(KacError):
    """Collision or norm quadrature failed its refinement check."""


class StabilityError(KacError):
    """Time step above the stability bound, or NaN detected during stepping."""

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step


class PicardNonConvergence(KacError):
    """The Picard iteration did not reach its tolerance within max_iter."""

    def __init__(self, message: str, last_deltas: tuple[float, ...] = ()):
        super().__init__(message)
        self.last_deltas = last_deltas


class FitError(KacError):
    """Too few usable modes or times for a radius fit."""


class AuditError(KacError):
    """Snapshot series unsuitable for the energy audit."""


class ConfigError(KacError):
    """Malformed or invalid run configuration."""


class SuiteError(KacError):
    """Unknown or empty verification suite selector."""
