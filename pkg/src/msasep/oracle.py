"""Independent ground truth: the multi-species ASEP as a finite Markov chain.

The lattice is truncated to a window ``[L, R]``. Jumps that would leave
the window are dropped but still counted in the exit rate, so probability
mass that would have left shows up as *leakage* instead of being reflected
back into the window.

Dynamics: every particle carries a rate-1 clock and picks the
right neighbour with probability ``p`` or the left one with ``q`` at each ring. An
empty target is entered; a target occupied by a strictly lower species is
entered by exchanging places; anything else blocks the jump.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from scipy.stats import poisson

from .bethe import SystemParams
from .combinatorics import Sector, sector_of
from .states import State, window_states

__all__ = [
    "State", "WindowedStateSpace", "EvolveResult", "CompareReport",
    "build_generator", "evolve", "gillespie", "compare", "tv_bound",
]

UNIFORMIZATION_TOL = 1e-12


@dataclass
class WindowedStateSpace:
    """All states of one species sector with positions inside ``[lo, hi]``."""

    lo: int
    hi: int
    sector: Sector
    states: list[State] = field(init=False, repr=False)
    index: dict[State, int] = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.sector, Sector):
            self.sector = sector_of(self.sector)
        n = self.sector.length
        if self.hi - self.lo + 1 < n:
            raise ValueError(f"window [{self.lo}, {self.hi}] cannot hold {n} particles")
        self.states = list(window_states(self.lo, self.hi, self.sector))
        self.index = {s: k for k, s in enumerate(self.states)}

    @classmethod
    def around(cls, initial: State, margin: int) -> "WindowedStateSpace":
        return cls(initial.positions[0] - margin, initial.positions[-1] + margin,
                   sector_of(initial.species))

    @property
    def n(self) -> int:
        return self.sector.length

    def __len__(self):
        return len(self.states)

    def expected_size(self) -> int:
        return math.comb(self.hi - self.lo + 1, self.n) * self.sector.dim

    def delta(self, state: State) -> np.ndarray:
        v = np.zeros(len(self.states))
        v[self.index[state]] = 1.0
        return v


def _moves(state: State, params: SystemParams):
    """Yield ``(target_state, rate)`` for every allowed jump, window ignored."""
    pos, spc = state.positions, state.species
    occupied = dict(zip(pos, range(len(pos))))
    for i, (x, s) in enumerate(zip(pos, spc)):
        for step, rate in ((1, params.p), (-1, params.q)):
            y = x + step
            j = occupied.get(y)
            if j is None:
                new_pos = pos[:i] + (y,) + pos[i + 1:]
                yield State(new_pos, spc), rate
            elif spc[j] < s:
                new = list(spc)
                new[i], new[j] = new[j], new[i]
                yield State(pos, tuple(new)), rate


def build_generator(space: WindowedStateSpace, params: SystemParams) -> sp.csr_matrix:
    """Rate matrix, rows = source state. Diagonals include rates of exiting jumps."""
    rows, cols, vals = [], [], []
    diag = np.zeros(len(space.states))
    for k, state in enumerate(space.states):
        for target, rate in _moves(state, params):
            diag[k] -= rate
            j = space.index.get(target)
            if j is not None:
                rows.append(k)
                cols.append(j)
                vals.append(rate)
    n = len(space.states)
    G = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return (G + sp.diags(diag)).tocsr()


@dataclass
class EvolveResult:
    probabilities: np.ndarray
    leakage: float
    terms: int

    def as_dict(self, space: WindowedStateSpace) -> dict[State, float]:
        return dict(zip(space.states, self.probabilities))


def evolve(space: WindowedStateSpace, generator: sp.spmatrix, initial: State | np.ndarray,
           t: float, tol: float = UNIFORMIZATION_TOL) -> EvolveResult:
    """Distribution at time ``t`` by uniformization.

    With ``lam = max exit rate`` and ``K = I + G/lam`` (substochastic),
    ``v e^{Gt} = sum_k Pois(k; lam t) v K^k``; the series is cut once the
    Poisson tail drops below ``tol``.
    """
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    v = space.delta(initial) if isinstance(initial, State) else np.asarray(initial, float)
    if t == 0:
        return EvolveResult(v.copy(), 1.0 - float(v.sum()), 0)
    lam = float(-generator.diagonal().min())
    if lam == 0:
        return EvolveResult(v.copy(), 1.0 - float(v.sum()), 0)
    KT = (sp.identity(generator.shape[0], format="csr") + generator / lam).T.tocsr()
    mu = lam * t
    kmax = int(poisson.isf(tol, mu)) + 1
    weights = poisson.pmf(np.arange(kmax + 1), mu)
    out = weights[0] * v
    term = v
    for k in range(1, kmax + 1):
        term = KT @ term
        out += weights[k] * term
    out = np.clip(out, 0.0, None)
    return EvolveResult(out, max(0.0, 1.0 - float(out.sum())), kmax)


def gillespie(initial: State, t: float, params: SystemParams, n_samples: int,
              seed: int = 0) -> dict[State, float]:
    """Empirical distribution at ``t`` from ``n_samples`` exact trajectories.

    Each particle has a rate-1 clock, so events arrive at total rate ``N``
    regardless of the configuration; blocked attempts leave the state
    unchanged. All samples advance together, one event per sweep. The RNG is
    Philox keyed by ``seed`` so results are reproducible across platforms.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = np.random.Generator(np.random.Philox(seed))
    n = initial.n
    pos = np.tile(np.array(initial.positions, dtype=np.int64), (n_samples, 1))
    spc = np.tile(np.array(initial.species, dtype=np.int64), (n_samples, 1))
    clock = rng.exponential(1.0 / n, size=n_samples)
    rows = np.arange(n_samples)
    while True:
        live = rows[clock <= t]
        if live.size == 0:
            break
        who = rng.integers(0, n, size=live.size)
        step = np.where(rng.random(live.size) < params.p, 1, -1)
        x = pos[live, who]
        s = spc[live, who]
        target = x + step
        # index of the neighbour in the chosen direction (positions are sorted)
        nb = who + step
        has_nb = (nb >= 0) & (nb < n)
        nb_safe = np.clip(nb, 0, n - 1)
        occupied = has_nb & (pos[live, nb_safe] == target)
        free = ~occupied
        swap = occupied & (spc[live, nb_safe] < s)
        moved = live[free]
        pos[moved, who[free]] = target[free]
        sw = live[swap]
        a, b = who[swap], nb_safe[swap]
        spc[sw, a], spc[sw, b] = spc[sw, b], s[swap]
        clock[live] += rng.exponential(1.0 / n, size=live.size)
    counts: dict[State, int] = {}
    for key in zip(map(tuple, pos.tolist()), map(tuple, spc.tolist())):
        counts[key] = counts.get(key, 0) + 1
    return {State(p, s): c / n_samples for (p, s), c in sorted(counts.items())}


def tv_bound(n_states: int, n_samples: int) -> float:
    """Concentration-style sanity bound ``4 sqrt(ln(states) / n)``."""
    return 4.0 * math.sqrt(math.log(max(n_states, 2)) / n_samples)


@dataclass
class CompareReport:
    max_abs_diff: float
    tv_distance: float
    worst: State | None
    rows: list[tuple[State, float, float, float]]


def compare(exact: Mapping[State, float], oracle: np.ndarray | Mapping[State, float],
            space: WindowedStateSpace) -> CompareReport:
    """Deviation between two distributions over the states of ``space``."""
    if not isinstance(oracle, Mapping):
        if len(oracle) != len(space.states):
            raise ValueError("oracle vector does not match the state space")
        oracle = dict(zip(space.states, oracle))
    unknown = [s for s in itertools.chain(exact, oracle) if s not in space.index]
    if unknown:
        raise ValueError(f"state {unknown[0]} lies outside the compared window")
    rows = []
    worst, max_diff, tv = None, 0.0, 0.0
    for s in space.states:
        e, o = float(exact.get(s, 0.0)), float(oracle.get(s, 0.0))
        d = abs(e - o)
        rows.append((s, e, o, d))
        tv += d
        if d > max_diff or worst is None:
            max_diff, worst = d, s
    return CompareReport(max_diff, 0.5 * tv, worst, rows)
