"""Exact transition probabilities of the multi-species ASEP.

Contour-integral formula with matrix-valued Bethe amplitudes, numerical
checks of the integrability relations, and a finite Markov chain oracle.
"""

from .bethe import SystemParams, amplitude_block, amplitude_column, amplitude_element
from .combinatorics import Sector, decompose, inversions, parse_word, sector_of
from .quadrature import ContourSpec, ConvergenceError, default_radius, max_radius
from .states import State
from .transition import (TransitionQuery, distribution, probability, sector_block,
                         single_species_probability, transition_probability,
                         window_probabilities)

__all__ = [
    "SystemParams", "State", "Sector", "ContourSpec", "ConvergenceError", "TransitionQuery",
    "sector_of", "parse_word", "inversions", "decompose", "amplitude_column",
    "amplitude_element", "amplitude_block", "max_radius", "default_radius", "probability",
    "transition_probability", "sector_block", "single_species_probability",
    "window_probabilities", "distribution",
]
