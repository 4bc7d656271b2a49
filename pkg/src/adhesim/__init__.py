"""Nonlocal cell-adhesion model: kernels, solver, bifurcation analysis and diagnostics."""
