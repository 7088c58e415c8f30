"""Transition probabilities of the multi-species ASEP from the contour formula.

The probability of going from ``(Y, nu)`` to ``(X, pi)`` in time ``t`` is the
``(pi, nu)`` entry of

    oint ... oint  sum_sigma A_sigma prod_i xi_{sigma(i)}^(x_i - y_{sigma(i)} - 1)
                   exp(eps(xi_i) t)  dxi_1 ... dxi_N,     eps(xi) = p/xi + q xi - 1,

over a centred circle of radius below :func:`~msasep.quadrature.max_radius`.

Numerics. Substituting ``eta_i = xi_{sigma(i)}`` in each sigma term gives every
term the same monomial ``prod_i eta_i^x_i``, so one grid pass serves all
permutations and, through :func:`~msasep.quadrature.monomial_window`, all
final positions of a window at once. On the contour the integrand has size
about ``r^(sum(x - y) - N)``; for states that moved left on balance this is
huge while the answer is small, and the sum cancels catastrophically. Such
states are evaluated in the mirror image (``x -> -x``, particle order
reversed, ``p <-> q``), an exact symmetry of the dynamics in which they moved
right. ``orientation="direct"`` switches this off.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bethe import AmplitudeEvaluator, SystemParams
from .combinatorics import Sector, decompose, sector_of
from .quadrature import (DEFAULT_MAX_NODES, DEFAULT_NODES, DEFAULT_TOL, MAX_PARTICLES,
                         ConvergenceError, ContourSpec, default_radius, integrate, max_radius,
                         monomial_window, trapezoid)
from .states import State, window_states

__all__ = [
    "TransitionQuery", "TransitionResult", "Distribution", "ProbabilityRangeError",
    "WindowTooSmallError", "energy", "reflect", "transition_probability", "probability",
    "sector_block", "single_species_probability", "sigma_term", "block_window",
    "window_probabilities", "distribution", "default_margin", "tasep_drift",
]

IMAG_TOL = 1e-9
OVERSHOOT_TOL = 1e-8
TOL_MASS = 1e-8
ORIENTATIONS = ("auto", "direct", "reflected")


class ProbabilityRangeError(ArithmeticError):
    """A computed probability left ``[0, 1]`` by more than the noise allowance."""


class WindowTooSmallError(RuntimeError):
    pass


@dataclass(frozen=True)
class TransitionQuery:
    initial: State
    final: State
    t: float
    params: SystemParams
    contour: ContourSpec | None = None


@dataclass(frozen=True)
class TransitionResult:
    """A value with its quadrature diagnostics.

    ``radius`` is the contour radius in the caller's frame; when the state
    was evaluated in the mirror image (``reflected``) the radius actually
    used there is the same fraction of the mirrored admissible bound.
    """

    value: float | np.ndarray
    error: float
    nodes: int
    radius: float
    imag: float = 0.0
    reflected: bool = False


def energy(xi, t: float, params: SystemParams):
    return np.exp((params.p / xi + params.q * xi - 1.0) * t)


def reflect(state: State) -> State:
    """Mirror image ``x -> -x``; the particle order and species word reverse."""
    return State(tuple(-x for x in reversed(state.positions)), state.species[::-1])


def _mirror(params: SystemParams) -> SystemParams:
    return SystemParams(params.q)


def _mirror_radius(radius: float, params: SystemParams) -> float:
    # same fraction of the admissible range in the mirrored system
    return radius * max_radius(_mirror(params)) / max_radius(params)


def _check_time(t):
    if not t >= 0:
        raise ValueError(f"time must be non-negative, got {t}")


def _check_size(n):
    if n > MAX_PARTICLES:
        raise ValueError(f"contour integration is capped at N = {MAX_PARTICLES}, got {n}")


def _check_orientation(orientation):
    if orientation not in ORIENTATIONS:
        raise ValueError(f"unknown orientation {orientation!r}")


class _Integrand:
    """Grid evaluator of ``sum_sigma A_sigma(xi(eta)) prod_i eta_i^(-y_sigma(i) - 1) e^(eps t)``.

    Returns an array ``(dim, ncols, *grid)`` holding the listed columns of
    the sector block (``dim = ncols = 1`` on the scalar single-species path).
    """

    def __init__(self, Y, sector: Sector | None, t, params, columns=None, sigmas=None):
        self.Y = tuple(Y)
        self.n = len(self.Y)
        self.sector = sector
        self.t = t
        self.params = params
        self.columns = None if columns is None else list(columns)
        if sigmas is None:
            sigmas = itertools.permutations(range(1, self.n + 1))
        self.paths = [decompose(s) for s in sigmas]

    def _start(self, batch_ndim):
        dim = self.sector.dim
        cols = range(dim) if self.columns is None else self.columns
        vec = np.zeros((dim, len(cols)) + (1,) * batch_ndim, dtype=complex)
        for c, k in enumerate(cols):
            vec[(k, c) + (0,) * batch_ndim] = 1.0
        return vec

    def __call__(self, grids):
        total = 0
        for path in self.paths:
            sigma = path.target
            xi = [None] * self.n
            for i, s in enumerate(sigma):
                xi[s - 1] = grids[i]
            ev = AmplitudeEvaluator(xi, self.params)
            if self.sector is None:
                s = ev.scalar(sigma, path)  # 0-d when sigma has no inversions
                amp = s.reshape((1, 1) + (s.shape if s.ndim else (1,) * len(grids)))
            else:
                amp = ev.transport(self._start(len(grids)), self.sector, path)
            weight = 1
            for i, s in enumerate(sigma):
                weight = weight * grids[i] ** (-self.Y[s - 1] - 1)
            total = total + amp * weight
        e = 1
        for g in grids:
            e = e * energy(g, self.t, self.params)
        return total * e


def _with_monomial(integrand, X, rows=None, cols=None):
    X = tuple(X)

    def evaluate(grids):
        vals = integrand(grids)
        mono = 1
        for g, x in zip(grids, X):
            mono = mono * g ** x
        vals = vals * mono
        if rows is not None:
            vals = vals[rows][:, cols]
        return vals
    return evaluate


def _finish_real(value, what="probability"):
    imag = float(np.max(np.abs(np.imag(value)), initial=0.0))
    if imag > IMAG_TOL:
        raise ArithmeticError(f"{what} has imaginary part {imag:.3g} above {IMAG_TOL}")
    real = np.real(np.asarray(value))
    if real.size:
        lo, hi = float(np.min(real)), float(np.max(real))
        if lo < -OVERSHOOT_TOL or hi > 1 + OVERSHOOT_TOL:
            raise ProbabilityRangeError(f"{what} outside [0, 1] beyond {OVERSHOOT_TOL}: "
                                        f"range [{lo:.3g}, {hi:.3g}]")
    return np.clip(real, 0.0, 1.0), imag


def _flip(Y, X, orientation):
    return orientation == "reflected" or (orientation == "auto" and sum(X) < sum(Y))


def _frame(initial: State, final: State, params, radius, orientation):
    """Move a query into the frame it is evaluated in."""
    if _flip(initial.positions, final.positions, orientation):
        return reflect(initial), reflect(final), _mirror(params), _mirror_radius(radius, params), True
    return initial, final, params, radius, False


def transition_probability(initial: State, final: State, t: float, params: SystemParams, *,
                           contour: ContourSpec | None = None, radius: float | None = None,
                           nodes: int = DEFAULT_NODES, max_nodes: int = DEFAULT_MAX_NODES,
                           tol: float = DEFAULT_TOL, orientation: str = "auto",
                           workers: int | None = None) -> TransitionResult:
    """``P_{(Y,nu)}(X,pi;t)`` with its quadrature diagnostics.

    Returns exactly zero, without integrating, when ``pi`` and ``nu`` are
    not rearrangements of each other (species are conserved).
    """
    _check_time(t)
    _check_orientation(orientation)
    if initial.n != final.n:
        raise ValueError("initial and final states have different particle numbers")
    _check_size(initial.n)
    if contour is not None:
        radius, nodes = contour.radius, contour.nodes
    radius = default_radius(params) if radius is None else radius
    ContourSpec(radius, nodes).validate(params)
    if final.species not in sector_of(initial.species):
        return TransitionResult(0.0, 0.0, 0, radius)
    init, fin, prm, r, flipped = _frame(initial, final, params, radius, orientation)
    sector = sector_of(init.species)
    integrand = _Integrand(init.positions, sector, t, prm, columns=[sector.rank(init.species)])
    evaluator = _with_monomial(integrand, fin.positions, [sector.rank(fin.species)], [0])
    res = integrate(evaluator, init.n, prm, r, nodes, max_nodes, tol, workers=workers)
    value, imag = _finish_real(res.value[0, 0])
    return TransitionResult(float(value), res.error, res.nodes, radius, imag, flipped)


def probability(query: TransitionQuery | State, final: State | None = None, t: float | None = None,
                params: SystemParams | None = None, **options) -> float:
    """Transition probability as a plain float (see :func:`transition_probability`)."""
    if isinstance(query, TransitionQuery):
        return transition_probability(query.initial, query.final, query.t, query.params,
                                      contour=query.contour, **options).value
    return transition_probability(query, final, t, params, **options).value


def _reversal(sector: Sector) -> np.ndarray:
    return np.array([sector.rank(w[::-1]) for w in sector], dtype=np.intp)


def sector_block(Y: Sequence[int], sector: Sector | str, X: Sequence[int], t: float,
                 params: SystemParams, *, radius: float | None = None, nodes: int = DEFAULT_NODES,
                 max_nodes: int = DEFAULT_MAX_NODES, tol: float = DEFAULT_TOL,
                 orientation: str = "auto", real: bool = True,
                 workers: int | None = None) -> TransitionResult:
    """The sector block of ``P_Y(X;t)``: rows ``pi``, columns ``nu``.

    All entries share one quadrature pass. With ``real=False`` the raw
    complex quadrature values are returned unclamped.
    """
    _check_time(t)
    _check_orientation(orientation)
    sector = sector if isinstance(sector, Sector) else sector_of(sector)
    Y, X = tuple(Y), tuple(X)
    if len(Y) != sector.length or len(X) != sector.length:
        raise ValueError("position lists must match the sector word length")
    _check_size(len(Y))
    radius = default_radius(params) if radius is None else radius
    ContourSpec(radius, nodes).validate(params)
    flipped = _flip(Y, X, orientation)
    prm, r = params, radius
    if flipped:
        Y, X = tuple(-y for y in reversed(Y)), tuple(-x for x in reversed(X))
        prm, r = _mirror(params), _mirror_radius(radius, params)
    res = integrate(_with_monomial(_Integrand(Y, sector, t, prm), X), len(Y), prm,
                    r, nodes, max_nodes, tol, workers=workers)
    value = res.value
    if flipped:
        rev = _reversal(sector)
        value = value[np.ix_(rev, rev)]
    if not real:
        return TransitionResult(value, res.error, res.nodes, radius, 0.0, flipped)
    value, imag = _finish_real(value, "sector block")
    return TransitionResult(value, res.error, res.nodes, radius, imag, flipped)


def single_species_probability(Y: Sequence[int], X: Sequence[int], t: float, params: SystemParams,
                               *, radius: float | None = None, nodes: int = DEFAULT_NODES,
                               max_nodes: int = DEFAULT_MAX_NODES, tol: float = DEFAULT_TOL,
                               orientation: str = "auto",
                               workers: int | None = None) -> TransitionResult:
    """Plain ASEP: every amplitude is the scalar product of ``S`` over inversions."""
    _check_time(t)
    _check_orientation(orientation)
    ones = (1,) * len(Y)
    radius = default_radius(params) if radius is None else radius
    ContourSpec(radius, nodes).validate(params)
    init, fin, prm, r, flipped = _frame(State(Y, ones), State(X, ones), params, radius, orientation)
    _check_size(init.n)
    integrand = _Integrand(init.positions, None, t, prm)
    res = integrate(_with_monomial(integrand, fin.positions), init.n, prm, r, nodes,
                    max_nodes, tol, workers=workers)
    value, imag = _finish_real(res.value[0, 0])
    return TransitionResult(float(value), res.error, res.nodes, radius, imag, flipped)


def sigma_term(sigma: Sequence[int], Y: Sequence[int], X: Sequence[int], t: float,
               params: SystemParams, spec: ContourSpec, sector: Sector | str | None = None) -> np.ndarray:
    """Sector block contributed by one permutation, at a fixed contour.

    Used to check that every ``sigma != Id`` term vanishes at ``t = 0``.
    ``sector=None`` selects the scalar single-species amplitude.
    """
    if sector is not None and not isinstance(sector, Sector):
        sector = sector_of(sector)
    integrand = _Integrand(Y, sector, t, params, sigmas=[tuple(sigma)])
    return trapezoid(_with_monomial(integrand, X), len(Y), spec.validate(params))


def block_window(Y: Sequence[int], sector: Sector | str, t: float, params: SystemParams,
                 lo: int, hi: int, spec: ContourSpec, *, columns: Sequence[int] | None = None,
                 sigmas: Sequence[Sequence[int]] | None = None,
                 workers: int | None = None) -> np.ndarray:
    """Raw complex integrals for every ``X`` in the box ``[lo, hi]^N``, one contour.

    Shape ``(dim, ncols, hi-lo+1, ..., hi-lo+1)``; axis ``2 + i`` is ``x_i``.
    Boxes also contain non-increasing ``X``, which carry no meaning and are
    ignored by callers. Literal formula only (no mirror image).
    """
    sector = sector if isinstance(sector, Sector) else sector_of(sector)
    n = len(Y)
    integrand = _Integrand(Y, sector, t, params, columns=columns, sigmas=sigmas)
    return monomial_window(integrand, n, spec.validate(params), [lo] * n, [hi] * n, workers=workers)


# -- whole windows --------------------------------------------------------------

def _gather(tensor, states, sector, lo):
    rows = np.array([sector.rank(s.species) for s in states], dtype=np.intp)
    pos = np.array([s.positions for s in states], dtype=np.intp) - lo
    return tensor[(rows,) + tuple(pos.T)]


def _converged_window(initial: State, t, params, lo, hi, states, radius, nodes, max_nodes, tol,
                      workers):
    sector = sector_of(initial.species)
    column = [sector.rank(initial.species)]

    def values(spec):
        tensor = block_window(initial.positions, sector, t, params, lo, hi, spec,
                              columns=column, workers=workers)[:, 0]
        return _gather(tensor, states, sector, lo)

    if 2 * nodes > max_nodes:
        raise ValueError(f"max_nodes {max_nodes} leaves no room to refine from {nodes}")
    spec = ContourSpec(radius, nodes)
    previous = values(spec)
    while 2 * spec.nodes <= max_nodes:
        spec = spec.refined()
        current = values(spec)
        diff = float(np.max(np.abs(current - previous)))
        if diff <= tol * max(1.0, float(np.max(np.abs(current)))):
            return current, diff, spec.nodes
        previous = current
    raise ConvergenceError(f"window did not converge by M = {spec.nodes} (last change {diff:.3g})",
                           current, previous, spec.nodes)


@dataclass
class Distribution:
    """Transition probabilities to every state of a window ``[lo, hi]``."""

    initial: State
    t: float
    params: SystemParams
    lo: int
    hi: int
    probabilities: dict[State, float]
    error: float
    nodes: int
    radius: float
    imag: float = 0.0

    @property
    def mass(self) -> float:
        return math.fsum(self.probabilities.values())

    @property
    def deficit(self) -> float:
        return 1.0 - self.mass

    def position_marginal(self) -> dict[tuple[int, ...], float]:
        """Probabilities of position sets with the species summed out."""
        out: dict[tuple[int, ...], float] = {}
        for s, v in self.probabilities.items():
            out[s.positions] = out.get(s.positions, 0.0) + v
        return out

    def site_marginals(self) -> dict[int, dict[int, float]]:
        """``species -> {site: probability that site holds that species}``."""
        out: dict[int, dict[int, float]] = {}
        for s, v in self.probabilities.items():
            for x, c in zip(s.positions, s.species):
                row = out.setdefault(c, {})
                row[x] = row.get(x, 0.0) + v
        return out


def window_probabilities(initial: State, t: float, params: SystemParams, lo: int, hi: int, *,
                         radius: float | None = None, nodes: int = DEFAULT_NODES,
                         max_nodes: int = DEFAULT_MAX_NODES, tol: float = DEFAULT_TOL,
                         orientation: str = "auto", workers: int | None = None) -> Distribution:
    """Probabilities of all states of ``initial``'s sector inside ``[lo, hi]``.

    Each orientation converges on its own states with the same doubling
    rule as :func:`~msasep.quadrature.integrate`.
    """
    _check_time(t)
    _check_orientation(orientation)
    _check_size(initial.n)
    radius = default_radius(params) if radius is None else radius
    ContourSpec(radius, nodes).validate(params)
    states = list(window_states(lo, hi, sector_of(initial.species)))
    Y = initial.positions
    groups: dict[bool, list[State]] = {False: [], True: []}
    for s in states:
        groups[_flip(Y, s.positions, orientation)].append(s)
    probs: dict[State, float] = {}
    err, m_final, imag = 0.0, 0, 0.0
    for flipped, group in groups.items():
        if not group:
            continue
        if flipped:
            found, diff, m = _converged_window(
                reflect(initial), t, _mirror(params), -hi, -lo, [reflect(s) for s in group],
                _mirror_radius(radius, params), nodes, max_nodes, tol, workers)
        else:
            found, diff, m = _converged_window(initial, t, params, lo, hi, group, radius,
                                               nodes, max_nodes, tol, workers)
        real, im = _finish_real(found, "window probabilities")
        probs.update(zip(group, real.tolist()))
        err, m_final, imag = max(err, diff), max(m_final, m), max(imag, im)
    ordered = {s: probs[s] for s in states}
    return Distribution(initial, t, params, lo, hi, ordered, err, m_final, radius, imag)


def default_margin(t: float) -> int:
    return math.ceil(4.0 * math.sqrt(t) + t + 4.0)


def distribution(initial: State, t: float, params: SystemParams,
                 window: tuple[int, int] | None = None, *, tol_mass: float = TOL_MASS,
                 max_growth: int = 6, **options) -> Distribution:
    """Distribution over a window, grown until the missing mass is below ``tol_mass``.

    With an explicit ``window`` nothing is grown; a total mass below
    ``1 - 10 tol_mass`` raises :class:`WindowTooSmallError`.
    """
    if window is not None:
        lo, hi = window
        if not (lo <= initial.positions[0] and initial.positions[-1] <= hi):
            raise ValueError(f"window [{lo}, {hi}] does not contain the initial positions")
        dist = window_probabilities(initial, t, params, lo, hi, **options)
        if dist.mass < 1.0 - 10 * tol_mass:
            raise WindowTooSmallError(f"window [{lo}, {hi}] holds mass {dist.mass:.12g}")
        return dist
    margin = default_margin(t)
    for _ in range(max_growth + 1):
        lo, hi = initial.positions[0] - margin, initial.positions[-1] + margin
        dist = window_probabilities(initial, t, params, lo, hi, **options)
        if abs(dist.deficit) < tol_mass:
            return dist
        margin += max(2, margin // 4)
    raise WindowTooSmallError(f"mass deficit {dist.deficit:.3g} after growing to margin {margin}")


def tasep_drift(initial: State, final: State, t: float,
                qs: Sequence[float] = (1e-1, 1e-2, 1e-3), **options) -> list[tuple[float, float]]:
    """Diagnostic only: ``(q, P)`` as ``q`` shrinks towards the totally asymmetric limit.

    The formula is not claimed to hold at ``q = 0``; this just shows how the
    value drifts. Runs with ``p = 1 - q`` and default numerics otherwise.
    """
    return [(q, transition_probability(initial, final, t, SystemParams(1.0 - q), **options).value)
            for q in qs]
