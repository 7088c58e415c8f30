"""
Comparison with the Markov chain
================================

The contour formula against uniformization on a finite window, and
Gillespie samples against both.
"""

from msasep import State, SystemParams
from msasep.oracle import WindowedStateSpace, build_generator, compare, evolve, gillespie, tv_bound
from msasep.transition import default_margin, window_probabilities

params = SystemParams(0.7)
start, t = State((0, 1), (1, 2)), 1.0

####################################################################
# The generator loses rate at the window edges; that lost mass is the
# leakage, and it must be tiny for the comparison to mean anything.

space = WindowedStateSpace.around(start, default_margin(t))
oracle = evolve(space, build_generator(space, params), start, t)
exact = window_probabilities(start, t, params, space.lo, space.hi)
report = compare(exact.probabilities, oracle.probabilities, space)
print(f"{len(space)} states, leakage {oracle.leakage:.1e}, max diff {report.max_abs_diff:.1e}")

####################################################################
# Monte Carlo. The total-variation distance should sit below the bound
# for the number of samples.

samples = gillespie(start, t, params, 20_000, seed=1)
tv = compare(samples, oracle.probabilities, space).tv_distance
print(f"TV {tv:.4f} < {tv_bound(len(space), 20_000):.4f}")
