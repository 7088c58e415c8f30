"""Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v`` (the lines appear in the
terminal summary) or ``pytest -s`` to see them inline.
"""

import itertools
import math
import random
import time

import numpy as np
import pytest

from conftest import admissible_point
from msasep.bethe import AmplitudeEvaluator, SystemParams, amplitude_element, scalar_amplitude
from msasep.combinatorics import all_sectors, decompose, inversions, sector_of
from msasep.integrability import (adversarial_points, random_points, run_suite, verify_inverse,
                                  verify_ybe)
from msasep.oracle import (WindowedStateSpace, build_generator, compare, evolve, gillespie,
                           tv_bound)
from msasep.quadrature import DEFAULT_TOL, max_radius
from msasep.states import State
from msasep.transition import (default_margin, distribution, single_species_probability,
                               window_probabilities)

P_VALUES = (0.3, 0.5, 0.7)


def _points(n, params, count, seed=0):
    return random_points(n, params, count, seed) + adversarial_points(n, params, 10, seed)


def test_criterion_01_inverse_relation(acceptance_log):
    worst, count = 0.0, 0
    for p in P_VALUES:
        params = SystemParams(p)
        for k in range(1, 6):
            for _, xi in _points(3, params, 50, seed=k):
                for b, a in itertools.permutations((1, 2, 3), 2):
                    rep = verify_inverse(b, a, xi, params, k)
                    worst = max(worst, rep.max_deviation)
                    count += len(rep.rows)
    ok = worst < 1e-12
    acceptance_log(1, ok, f"inverse relation, alphabets 1..5, {count} blocks, max dev {worst:.2e} "
                          f"(< 1e-12)")
    assert ok


def test_criterion_02_yang_baxter(acceptance_log):
    worst, kinds = 0.0, set()
    for p in P_VALUES:
        params = SystemParams(p)
        for _, xi in _points(3, params, 50, seed=2):
            for g, b, a in itertools.permutations((1, 2, 3)):
                for tri in all_sectors(3, 3):
                    worst = max(worst, verify_ybe(g, b, a, xi, params, tri).max_deviation)
                    kinds.add(len(set(tri.multiset)))
    ok = worst < 1e-12 and kinds == {1, 2, 3}
    acceptance_log(2, ok, f"Yang-Baxter on [i,i,i], [i,i,j], [i,j,j], [i,j,k], max dev {worst:.2e} "
                          f"(< 1e-12)")
    assert ok


def _reduced_words(sigma):
    """Every minimal adjacent-swap word reaching ``sigma``, by exhaustive descent removal."""
    sigma = tuple(sigma)
    descents = [i for i in range(len(sigma) - 1) if sigma[i] > sigma[i + 1]]
    if not descents:
        return {()}
    words = set()
    for i in descents:
        prev = list(sigma)
        prev[i], prev[i + 1] = prev[i + 1], prev[i]
        words |= {w + (i + 1,) for w in _reduced_words(prev)}
    return words


def _second_path(sigma, rng):
    """A minimal decomposition whose word differs from the bubble one, if one exists."""
    first = decompose(sigma)
    for strategy in ("insertion",) + ("random",) * 200:
        path = decompose(sigma, strategy, rng)
        if path.word != first.word:
            return first, path
    return first, None


def test_criterion_03_well_definedness(acceptance_log):
    rng = random.Random(3)
    s4 = list(itertools.permutations(range(1, 5)))
    multi5 = [s for s in itertools.permutations(range(1, 6)) if len(_reduced_words(s)) > 1]
    s5 = rng.sample(multi5, 10)
    worst, compared, unique = 0.0, 0, 0
    for sigma in s4 + s5:
        n = len(sigma)
        first, second = _second_path(sigma, rng)
        if second is None:
            # only permutations with a single reduced word may be skipped
            assert len(_reduced_words(sigma)) == 1
            unique += 1
            continue
        assert second.target == first.target == sigma
        compared += 1
        for sector in (sector_of(tuple(range(1, n + 1))), sector_of((1, 1) + tuple(range(2, n)))):
            for p in P_VALUES:
                params = SystemParams(p)
                point_rng = np.random.default_rng([3, compared])
                for _ in range(20):
                    ev = AmplitudeEvaluator(admissible_point(point_rng, n, params), params)
                    dev = np.max(np.abs(ev.block(sigma, sector, first) - ev.block(sigma, sector, second)))
                    worst = max(worst, float(dev))
    ok = worst < 1e-12
    acceptance_log(3, ok, f"A_sigma well-defined: {compared} permutations (S4 and 10 from S5) with "
                          f"two distinct words, {unique} in S4 have only one; max dev {worst:.2e} "
                          f"(< 1e-12)")
    assert ok


def test_criterion_04_single_species_reduction(acceptance_log):
    worst, worst_rel = 0.0, 0.0
    rng = np.random.default_rng(4)
    for n in range(1, 6):
        ones = (1,) * n
        for p in P_VALUES:
            params = SystemParams(p)
            for _ in range(50):
                xi = admissible_point(rng, n, params)
                ev = AmplitudeEvaluator(xi, params)
                for sigma in itertools.permutations(range(1, n + 1)):
                    got = amplitude_element(sigma, ones, ones, xi, params)
                    worst = max(worst, abs(got - scalar_amplitude(sigma, xi, params)))
                    # the same product with factors in a different (sorted) order
                    other = np.prod([ev.scalars(b, a)[0] for b, a in sorted(inversions(sigma))])
                    worst_rel = max(worst_rel, abs(got - other) / max(1.0, abs(other)))
    ok = worst < 1e-13 and worst_rel < 1e-14
    acceptance_log(4, ok, f"single-species reduction N <= 5: max dev {worst:.2e} (< 1e-13); "
                          f"vs reordered product, relative {worst_rel:.1e} (< 1e-14)")
    assert ok


def test_criterion_05_initial_condition(acceptance_log):
    start = time.perf_counter()
    report = run_suite("initial", p_values=P_VALUES)
    elapsed = time.perf_counter() - start
    full = max(r.deviation for r in report.rows if r.relation == "initial")
    terms = max(r.deviation for r in report.rows if r.relation.startswith("sigma="))
    ok = full < 1e-8 and terms < 1e-8
    acceptance_log(5, ok, f"t = 0 identity, N <= 3: block dev {full:.2e}, sigma != Id terms "
                          f"{terms:.2e} (< 1e-8), {elapsed:.0f}s")
    assert ok


ORACLE_CASES = [
    (State((0, 1), (1, 2)), 0.25),
    (State((0, 1), (1, 2)), 1.0),
    (State((0, 2, 4), (1, 2, 3)), 0.5),
    (State((0, 2, 4), (1, 1, 2)), 0.5),
]


def test_criterion_06_oracle_equivalence(acceptance_log):
    params = SystemParams(0.7)
    start = time.perf_counter()
    worst, leak = 0.0, 0.0
    parts = []
    for initial, t in ORACLE_CASES:
        space = WindowedStateSpace.around(initial, default_margin(t))
        oracle = evolve(space, build_generator(space, params), initial, t)
        exact = window_probabilities(initial, t, params, space.lo, space.hi)
        dev = compare(exact.probabilities, oracle.probabilities, space).max_abs_diff
        worst, leak = max(worst, dev), max(leak, oracle.leakage)
        parts.append(f"{initial}@{t:g}:{dev:.1e}")
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and leak <= 1e-8 and elapsed <= 600
    acceptance_log(6, ok, f"oracle equivalence {' '.join(parts)}; max {worst:.2e} (<= 1e-6), "
                          f"leakage {leak:.1e} (<= 1e-8), {elapsed:.0f}s")
    assert ok


CONSERVATION_CASES = [
    (State((0,), (1,)), 2.0, 0.5),
    (State((0, 1), (1, 2)), 2.0, 0.7),
    (State((0, 1), (2, 1)), 1.0, 0.3),
    (State((0, 2, 4), (1, 2, 3)), 2.0, 0.7),
    (State((0, 2, 4), (2, 1, 1)), 1.0, 0.5),
]


def test_criterion_07_conservation(acceptance_log):
    worst = 0.0
    for initial, t, p in CONSERVATION_CASES:
        dist = distribution(initial, t, SystemParams(p))
        worst = max(worst, abs(dist.deficit))
    ok = worst <= 1e-6
    acceptance_log(7, ok, f"conservation on calibrated windows, N <= 3, t <= 2: "
                          f"max |1 - mass| {worst:.2e} (<= 1e-6)")
    assert ok


def _free_walk(d, t, p):
    q, a = 1 - p, abs(d)
    total = math.fsum(math.exp(k * math.log(p * q) + (2 * k + a) * math.log(t)
                               - math.lgamma(k + 1) - math.lgamma(k + a + 1)) for k in range(120))
    return math.exp(-t) * (p ** a if d >= 0 else q ** a) * total


def test_criterion_08_free_particle(acceptance_log):
    worst = 0.0
    for p in P_VALUES:
        params = SystemParams(p)
        for t in (0.5, 1.0, 2.0, 3.0):
            for d in range(-10, 11):
                got = single_species_probability((3,), (3 + d,), t, params).value
                worst = max(worst, abs(got - _free_walk(d, t, p)))
    ok = worst < 1e-10
    acceptance_log(8, ok, f"free particle vs Poisson jump series, |x-y| <= 10, t <= 3: "
                          f"max dev {worst:.2e} (< 1e-10)")
    assert ok


RADIUS_CASES = [
    (State((0,), (1,)), 2.0, 0.4, (-10, 10)),
    (State((0, 1), (1, 2)), 1.0, 0.7, (-9, 10)),
    (State((0, 2, 4), (1, 2, 3)), 0.5, 0.7, (-4, 8)),
]


def test_criterion_09_radius_invariance(acceptance_log):
    worst = 0.0
    for initial, t, p, (lo, hi) in RADIUS_CASES:
        params = SystemParams(p)
        a, b = (window_probabilities(initial, t, params, lo, hi, radius=f * max_radius(params))
                for f in (0.5, 0.9))
        worst = max(worst, max(abs(a.probabilities[s] - b.probabilities[s]) for s in a.probabilities))
    ok = worst <= 2 * DEFAULT_TOL
    acceptance_log(9, ok, f"radii 0.5 and 0.9 of the bound, N = 1, 2, 3: max dev {worst:.2e} "
                          f"(<= {2 * DEFAULT_TOL:g})")
    assert ok


def test_criterion_10_monte_carlo(acceptance_log):
    params = SystemParams(0.7)
    initial, t, n = State((0, 1), (1, 2)), 1.0, 100_000
    space = WindowedStateSpace.around(initial, 14)
    oracle = evolve(space, build_generator(space, params), initial, t)
    empirical = gillespie(initial, t, params, n, seed=2024)
    tv = compare(empirical, oracle.probabilities, space).tv_distance
    bound = tv_bound(len(space), n)
    ok = tv < bound
    acceptance_log(10, ok, f"Gillespie n=1e5 vs uniformization, N = 2, t = 1: TV {tv:.4f} "
                           f"< bound {bound:.4f}")
    assert ok
