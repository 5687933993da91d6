"""Grids, collision operators, weights, norms, solvers and verification suites."""
