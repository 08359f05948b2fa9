"""Verblunsky-coefficient certification and Prüfer analysis for half-line Jacobi operators."""

__version__ = "0.1.0"

from .core import (DEFAULT_TOL, JacobiCoeffs, Potential, Tolerances, gen_alternating,
                   gen_extremal, gen_wvn, load_potential)
from .verblunsky import CertResult, certify, gamma_from_jacobi, jacobi_from_gamma, m_function, schur_step2
from .eigenfunctions import SolutionTrace, edge_solutions, oscillation_count, solve
from .oracle import eig_count_above, eigs_outside, first_outside_truncation
from .prufer import decompose, evolve
from .bounds import verify_gamma_bounds, verify_potential_bounds
from .continuum import ContinuumPotential, integrate_uv, verify_continuum_bounds

__all__ = [
    "DEFAULT_TOL", "JacobiCoeffs", "Potential", "Tolerances", "gen_alternating", "gen_extremal",
    "gen_wvn", "load_potential", "CertResult", "certify", "gamma_from_jacobi", "jacobi_from_gamma",
    "m_function", "schur_step2", "SolutionTrace", "edge_solutions", "oscillation_count", "solve",
    "eig_count_above", "eigs_outside", "first_outside_truncation", "decompose", "evolve",
    "verify_gamma_bounds", "verify_potential_bounds", "ContinuumPotential", "integrate_uv",
    "verify_continuum_bounds",
]
