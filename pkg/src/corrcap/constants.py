"""Numerical tolerances used across the toolkit.

These are deliberately centralized: validation thresholds are part of the
public contract (what inputs are accepted) and the certification thresholds
decide when a solver answer is downgraded to "inaccurate".
"""
from __future__ import annotations

# Hermiticity check on matrices built by arithmetic that should be exactly
# Hermitian up to rounding.
HERMITIAN_ATOL = 1e-10

# Slack allowed on eigenvalues when validating positive semidefiniteness of
# user-supplied or reconstructed matrices.
PSD_ATOL = 1e-8

# Maximum constraint violation accepted before a solution is downgraded.
FEASIBILITY_TOL = 1e-7

# Maximum primal-dual objective gap accepted before downgrading. The gap
# compares two independently solved programs, each accurate to the solver
# tolerance below, so it is looser than the per-program feasibility bound.
GAP_TOL = 5e-7

# Termination tolerances handed to the conic solver. Tighter settings make
# it stall one step short of its target on some programs and report reduced
# accuracy for solutions that are in fact well inside our certification
# thresholds.
SOLVER_TOL = 5e-8

# Matrices loaded from files must be Hermitian to this tolerance.
IO_HERMITIAN_ATOL = 1e-8

# Values of the capability measures this close below zero are clamped to
# zero; anything more negative is treated as a solver failure.
CLAMP_TOL = 1e-6
