"""Numerical checks of the algebra behind the amplitudes.

Four relations are tested at random admissible spectral points:

* inverse:  ``R_{beta alpha} R_{alpha beta} = I`` on every two-letter sector;
* ybe:      ``(R_gb x I)(I x R_ga)(R_ba x I) = (I x R_ba)(R_ga x I)(I x R_gb)``
            on three-letter sectors;
* braid:    commutation, braid and inverse identities of the position
            operators ``T_l`` on longer words;
* initial:  at ``t = 0`` the contour integral is the identity for
            ``x_i >= y_i``, and each ``sigma != Id`` term integrates to zero.

Every check returns a :class:`Report` of rows ``(relation, sector, point, deviation)``
with max-norm deviations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bethe import AmplitudeEvaluator, SystemParams, b_block, r_block
from .combinatorics import Sector, all_sectors, sector_of
from .quadrature import ContourSpec, default_radius, max_radius

__all__ = [
    "ReportRow", "Report", "random_points", "adversarial_points", "verify_inverse",
    "verify_ybe", "verify_braid", "verify_initial", "run_suite", "SUITES", "THRESHOLDS",
]

SUITES = ("inverse", "ybe", "braid", "initial")
THRESHOLDS = {"inverse": 1e-12, "ybe": 1e-12, "braid": 1e-12, "initial": 1e-8}
POINT_FRACTION = 0.9
ADVERSARIAL_FRACTION = 0.999


@dataclass(frozen=True)
class ReportRow:
    relation: str
    sector: str
    point: str
    deviation: float

    def csv(self) -> str:
        return f"{self.relation},{self.sector},{self.point},{self.deviation:.17g}"


@dataclass
class Report:
    rows: list[ReportRow] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((r.deviation for r in self.rows), default=0.0)

    @property
    def worst(self) -> ReportRow | None:
        return max(self.rows, key=lambda r: r.deviation, default=None)

    def extend(self, other: "Report") -> "Report":
        self.rows.extend(other.rows)
        return self

    def passed(self, threshold: float) -> bool:
        return self.max_deviation < threshold


# -- spectral points -------------------------------------------------------------

def _circle(n: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    return radius * np.exp(2j * np.pi * rng.random(n))


def random_points(n: int, params: SystemParams, count: int, seed: int = 0,
                  fraction: float = POINT_FRACTION) -> list[tuple[str, np.ndarray]]:
    """``count`` points with ``n`` coordinates on the circle ``fraction * r_max``.

    Point ``k`` comes from its own stream seeded by ``(seed, k)``; the label
    ``"seed:k"`` identifies it in reports.
    """
    r = fraction * max_radius(params)
    return [(f"{seed}:{k}", _circle(n, r, np.random.default_rng([seed, k])))
            for k in range(count)]


def adversarial_points(n: int, params: SystemParams, count: int, seed: int = 0):
    """Points hugging the admissible bound, where the denominators are smallest."""
    pts = random_points(n, params, count, seed, ADVERSARIAL_FRACTION)
    return [(f"adv{label}", xi) for label, xi in pts]


def _maxdev(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


# -- relations -------------------------------------------------------------------

def verify_inverse(beta: int, alpha: int, xi: Sequence[complex], params: SystemParams,
                   alphabet: int, label: str = "") -> Report:
    """``r_block(beta, alpha) @ r_block(alpha, beta) = I`` on all two-letter sectors."""
    report = Report()
    for sector in all_sectors(2, alphabet):
        prod = r_block(sector, beta, alpha, xi, params).entries @ \
            r_block(sector, alpha, beta, xi, params).entries
        report.rows.append(ReportRow("inverse", str(sector), label,
                                     _maxdev(prod, np.eye(sector.dim))))
    return report


def _compose(ev: AmplitudeEvaluator, sector: Sector, steps) -> np.ndarray:
    """Dense block of ``T_{l_k} ... T_{l_1}`` for ``steps = [(l_1, b_1, a_1), ...]``."""
    out = np.eye(sector.dim, dtype=complex)
    for l, b, a in steps:
        out = ev.apply(out, sector, l, b, a)
    return out


def _ybe_sides(ev, sector, gamma, beta, alpha, l=1):
    # operators act right to left, so steps are listed in application order
    left = _compose(ev, sector, [(l, beta, alpha), (l + 1, gamma, alpha), (l, gamma, beta)])
    right = _compose(ev, sector, [(l + 1, gamma, beta), (l, gamma, alpha), (l + 1, beta, alpha)])
    return left, right


def verify_ybe(gamma: int, beta: int, alpha: int, xi: Sequence[complex], params: SystemParams,
               triple: Sector | str | Sequence[int], label: str = "") -> Report:
    """Both sides of the Yang-Baxter equation on one three-letter sector."""
    if len({gamma, beta, alpha}) != 3:
        raise ValueError("the Yang-Baxter check needs three distinct spectral indices")
    sector = triple if isinstance(triple, Sector) else sector_of(triple)
    if sector.length != 3:
        raise ValueError(f"expected a three-letter sector, got {sector}")
    left, right = _ybe_sides(AmplitudeEvaluator(xi, params), sector, gamma, beta, alpha)
    return Report([ReportRow("ybe", str(sector), label, _maxdev(left, right))])


def verify_braid(i: int, j: int, xi: Sequence[complex], params: SystemParams, length: int,
                 alphabet: int, label: str = "", indices: Sequence[int] = (1, 2, 3, 4)) -> Report:
    """Relations of ``T_i`` and ``T_j`` on every sector of ``length``-letter words.

    ``|i - j| >= 2``: ``T_i T_j = T_j T_i`` with four distinct spectral indices.
    ``|i - j| == 1``: the braid (Yang-Baxter) identity at positions ``min(i, j)``.
    ``i == j``: ``T_i(beta, alpha) T_i(alpha, beta) = I``.
    """
    for pos in (i, j):
        if not 1 <= pos < length:
            raise ValueError(f"position {pos} out of range 1..{length - 1}")
    a, b, c, d = indices
    ev = AmplitudeEvaluator(xi, params)
    report = Report()
    for sector in all_sectors(length, alphabet):
        if abs(i - j) >= 2:
            lhs = _compose(ev, sector, [(j, d, c), (i, b, a)])
            rhs = _compose(ev, sector, [(i, b, a), (j, d, c)])
            kind = "commute"
        elif abs(i - j) == 1:
            lhs, rhs = _ybe_sides(ev, sector, c, b, a, min(i, j))
            kind = "braid"
        else:
            lhs = _compose(ev, sector, [(i, a, b), (i, b, a)])
            rhs = np.eye(sector.dim)
            kind = "unitarity"
        report.rows.append(ReportRow(f"{kind}[{i},{j}]", str(sector), label, _maxdev(lhs, rhs)))
    return report


def verify_initial(Y: Sequence[int], sector: Sector | str, params: SystemParams,
                   spec: ContourSpec | None = None, reach: int = 3) -> Report:
    """t = 0 identity for all ``X`` with ``y_i <= x_i <= y_N + reach``.

    Rows ``initial`` compare the full sector block with ``delta_{XY} I``;
    rows ``sigma=...`` give the largest entry of each ``sigma != Id`` term.
    Each deviation is taken at ``spec`` and at twice its node count, so a
    value that has not converged also shows up.
    """
    from .transition import block_window  # transition depends on this module's siblings only

    sector = sector if isinstance(sector, Sector) else sector_of(sector)
    Y = tuple(Y)
    n = len(Y)
    spec = spec or ContourSpec(default_radius(params), 32)
    lo, hi = Y[0], Y[-1] + reach
    box = [X for X in itertools.product(range(lo, hi + 1), repeat=n)
           if all(b > a for a, b in zip(X, X[1:])) and all(x >= y for x, y in zip(X, Y))]
    idx = tuple(np.array(box).T - lo)
    target = np.zeros((sector.dim, sector.dim, len(box)))
    k0 = box.index(Y)
    target[:, :, k0] = np.eye(sector.dim)
    report = Report()
    name = f"{sector}@Y={','.join(map(str, Y))}"
    sigmas = [None] + [s for s in itertools.permutations(range(1, n + 1))
                       if s != tuple(range(1, n + 1))]
    for sigma in sigmas:
        dev = 0.0
        for s in (spec, spec.refined()):
            vals = block_window(Y, sector, 0.0, params, lo, hi, s,
                                sigmas=None if sigma is None else [sigma])
            vals = vals[(slice(None), slice(None)) + idx]
            ref = target if sigma is None else 0.0
            dev = max(dev, _maxdev(vals, ref))
        relation = "initial" if sigma is None else "sigma=" + "".join(map(str, sigma))
        report.rows.append(ReportRow(relation, name, f"M={spec.nodes}", dev))
    return report


# -- suites ----------------------------------------------------------------------

_INITIAL_CASES = {1: ((0,),), 2: ((0, 1), (0, 2)), 3: ((0, 1, 2), (0, 2, 4))}


def _pairs(n):
    return [(b, a) for a in range(1, n + 1) for b in range(1, n + 1) if a != b]


def _suite_points(n, params, points, seed):
    return random_points(n, params, points, seed) + adversarial_points(n, params, max(1, points // 5),
                                                                       seed)


def run_suite(name: str, *, alphabet: int = 3, points: int = 50, seed: int = 0,
              p_values: Iterable[float] = (0.3, 0.5, 0.7), max_length: int | None = None) -> Report:
    """Run one named suite (or ``"all"``) and return every row.

    Deterministic for fixed arguments. ``alphabet`` bounds species labels
    and, for the braid suite, the word length (at least 4, at most 5).
    """
    if name == "all":
        report = Report()
        for suite in SUITES:
            report.extend(run_suite(suite, alphabet=alphabet, points=points, seed=seed,
                                    p_values=p_values, max_length=max_length))
        return report
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    report = Report()
    for p in p_values:
        params = SystemParams(p)
        tag = f"p={p:g}"
        if name == "inverse":
            for label, xi in _suite_points(3, params, points, seed):
                for b, a in _pairs(3):
                    report.extend(verify_inverse(b, a, xi, params, alphabet, f"{tag}/{label}"))
        elif name == "ybe":
            triples = all_sectors(3, alphabet)
            for label, xi in _suite_points(3, params, points, seed):
                for g, b, a in itertools.permutations((1, 2, 3)):
                    for tri in triples:
                        report.extend(verify_ybe(g, b, a, xi, params, tri, f"{tag}/{label}"))
        elif name == "braid":
            length = max_length or min(5, max(4, alphabet))
            # braid rows are costlier; a fifth of the points still covers every sector
            for label, xi in _suite_points(4, params, max(2, points // 5), seed):
                for i, j in [(1, 1), (1, 2), (2, 3), (1, 3)] + ([(2, 4)] if length >= 5 else []):
                    report.extend(verify_braid(i, j, xi, params, length, min(alphabet, length),
                                               f"{tag}/{label}"))
        else:
            for n, cases in _INITIAL_CASES.items():
                for Y in cases:
                    for sector in _order_types(n):
                        report.extend(verify_initial(Y, sector, params))
    return report


def _order_types(n: int) -> list[Sector]:
    """One sector per pattern of ties among ``n`` letters (labels 1..k used)."""
    out = []
    for ms in itertools.combinations_with_replacement(range(1, n + 1), n):
        used = sorted(set(ms))
        if used == list(range(1, len(used) + 1)):
            out.append(Sector(ms))
    return out


def b_column_sums(sector2, params) -> np.ndarray:
    """Column sums of the ``B`` block; all equal to 1."""
    return b_block(sector2, params).entries.sum(axis=0)
