"""
Bethe amplitudes and the two-site R-matrix
==========================================

Build the two-letter R blocks at a spectral point, then a full amplitude
``A_sigma`` on a three-letter sector.
"""

import numpy as np

from msasep import SystemParams, amplitude_block, decompose, sector_of
from msasep.bethe import r_block, scalar_amplitude
from msasep.quadrature import max_radius

params = SystemParams(0.7)
r = 0.9 * max_radius(params)
xi = r * np.exp(2j * np.pi * np.array([0.11, 0.47, 0.83]))

####################################################################
# On two distinct letters the R block is 2x2; on a repeated letter it is
# the scalar ``S``. Swapping the spectral indices inverts it.

sector = sector_of("12")
R21 = r_block(sector, 2, 1, xi, params).entries
R12 = r_block(sector, 1, 2, xi, params).entries
print(np.round(R21, 4))
print("max |R21 R12 - I| =", np.abs(R21 @ R12 - np.eye(2)).max())

####################################################################
# ``A_sigma`` is transported along a reduced word of ``sigma``; any
# reduced word gives the same block.

sigma = (3, 1, 2)
print("word:", decompose(sigma).word)
block = amplitude_block(sigma, sector_of("123"), xi, params)
print(block.entries.shape)

####################################################################
# With one species the sector has a single word and the block collapses
# to a product of ``S`` factors.

ones = amplitude_block(sigma, sector_of("111"), xi, params)
print(ones.entries[0, 0], scalar_amplitude(sigma, xi, params))
