"""
Transition probabilities on a window
====================================

Single probabilities, a whole window at once, and the calibrated
distribution with its marginals.
"""

import matplotlib.pyplot as plt

from msasep import State, SystemParams, distribution, probability, transition_probability

params = SystemParams(0.7)
start = State((0, 1), (1, 2))

####################################################################
# One entry. The result carries the node count and the radius used; a
# state that moved left on balance is evaluated in the mirror image.

res = transition_probability(start, State((1, 2), (1, 2)), 1.0, params)
print(res.value, res.nodes, res.radius, res.reflected)
print(probability(start, State((-1, 1), (1, 2)), 1.0, params))

####################################################################
# ``distribution`` widens the window until the missing mass is below
# tolerance, so the probabilities sum to one.

dist = distribution(start, 1.0, params)
print(f"window [{dist.lo}, {dist.hi}], {len(dist.probabilities)} states, "
      f"deficit {dist.deficit:.1e}")

####################################################################
# Where is each species? The second-class particle (label 2) drifts
# slower than the first.

fig, ax = plt.subplots()
for species, row in sorted(dist.site_marginals().items()):
    sites = sorted(row)
    ax.plot(sites, [row[x] for x in sites], "o-", label=f"species {species}")
ax.set_xlabel("site")
ax.set_ylabel("probability")
ax.legend()
plt.show()
