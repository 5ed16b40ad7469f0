"""Wigner phase-space current, flow topology and fieldline analysis."""

__version__ = "0.1.0"

from .current import CurrentEvaluator, CurrentSample, fill_current_grid
from .eigenstates import (MorseSpectrumParams, fd_diagonalize, harmonic_state,
                          morse_energy, morse_state)
from .potentials import HarmonicPotential, MorsePotential, PolynomialPotential
from .topology import (FieldlineControls, equi_wigner_deviation,
                       extract_zero_contours, find_stagnation_points,
                       integrate_fieldline, topological_charge, winding_index)
from .wigner import GridSpec, PhaseGrid, WignerEvaluator

__all__ = [
    "__version__",
    "CurrentEvaluator", "CurrentSample", "fill_current_grid",
    "MorseSpectrumParams", "fd_diagonalize", "harmonic_state",
    "morse_energy", "morse_state",
    "HarmonicPotential", "MorsePotential", "PolynomialPotential",
    "FieldlineControls", "equi_wigner_deviation", "extract_zero_contours",
    "find_stagnation_points", "integrate_fieldline", "topological_charge",
    "winding_index",
    "GridSpec", "PhaseGrid", "WignerEvaluator",
]
