"""
kac-smoothing
Fourier-spectral solver and verification harness for the non-cutoff Kac equation.
"""

__version__ = "0.1.0"
__description__ = "Spectral Kac solver with smoothing-effect diagnostics"
