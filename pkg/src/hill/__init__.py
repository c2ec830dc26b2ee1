"""Spectral analysis of Hill's equation ``-u'' + Q u = lambda u`` with 1-periodic ``Q``."""

from .discriminant import discriminant, discriminant_grid, h_plus_minus, m_n_pair, weyl_matrix
from .errors import HillError
from .fundamental import (IntegratorOptions, MonodromyData, integrate_fundamental, monodromy,
                          solution_at, transfer_matrix_piecewise)
from .herglotz import GridSpec, lemma2_suite, residue_at, verify_herglotz
from .oracles import JacobiCell, bloch_eigenvalues, fd_line_spectrum, jacobi_discriminant, prop4_check
from .potential import PotentialSpec, evaluate, load_potential, parse_potential, potential_bounds
from .spectrum import BandStructure, band_edges, classify_gap, dirichlet_eigenvalues, in_spectrum

__all__ = [
    "BandStructure", "GridSpec", "HillError", "IntegratorOptions", "JacobiCell", "MonodromyData",
    "PotentialSpec", "band_edges", "bloch_eigenvalues", "classify_gap", "dirichlet_eigenvalues",
    "discriminant", "discriminant_grid", "evaluate", "fd_line_spectrum", "h_plus_minus", "in_spectrum",
    "integrate_fundamental", "jacobi_discriminant", "lemma2_suite", "load_potential", "m_n_pair",
    "monodromy", "parse_potential", "potential_bounds", "prop4_check", "residue_at", "solution_at",
    "transfer_matrix_piecewise", "verify_herglotz", "weyl_matrix",
]
