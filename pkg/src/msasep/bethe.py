"""Two-body scattering amplitudes and the permutation amplitudes ``A_sigma``.

Everything here acts on *sector-indexed* vectors: a complex array whose
leading axis runs over the words of a :class:`~msasep.combinatorics.Sector`
in lexicographic order. Trailing axes are free batch axes, so a spectral
point may hold numpy arrays (e.g. a whole quadrature grid) instead of
scalars and every operation is applied pointwise.

Spectral indices (``alpha``, ``beta``, ...) are 1-based, matching the
subscripts of ``S_{beta alpha}`` etc.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .combinatorics import (Sector, TranspositionPath, check_permutation, decompose, parse_word,
                            sector_of)

__all__ = [
    "SystemParams", "AmplitudeBlock", "SingularityError",
    "pair_scalars", "scalar_S", "scalar_P", "scalar_Q", "scalar_T",
    "r_block", "b_block", "r_from_b", "apply_T_l", "t_block",
    "AmplitudeEvaluator", "amplitude_column", "amplitude_element",
    "amplitude_block", "scalar_amplitude",
]

SINGULAR_TOL = 1e-14


class SingularityError(ArithmeticError):
    """A scattering denominator ``p + q xi_a xi_b - xi_a`` vanished."""

    def __init__(self, beta, alpha, modulus):
        self.beta, self.alpha, self.modulus = beta, alpha, modulus
        super().__init__(f"near-singular denominator for (beta, alpha) = ({beta}, {alpha}): "
                         f"|D| = {modulus:.3g}")


@dataclass(frozen=True)
class SystemParams:
    """Right-hop rate ``p``; the left-hop rate is ``q = 1 - p``."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must lie strictly between 0 and 1, got {self.p}")

    @property
    def q(self) -> float:
        return 1.0 - self.p


@dataclass(frozen=True)
class AmplitudeBlock:
    sector: Sector
    entries: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.entries)):
            raise FloatingPointError("amplitude block has non-finite entries")


def _point(xi, index):
    if not 1 <= index <= len(xi):
        raise IndexError(f"spectral index {index} out of range 1..{len(xi)}")
    return xi[index - 1]


def pair_scalars(x_alpha, x_beta, params: SystemParams, labels=("beta", "alpha")):
    """Return ``(S, P, Q, T)`` for the pair ``(beta, alpha)``.

    ``x_alpha`` and ``x_beta`` may be scalars or broadcastable arrays.
    """
    p, q = params.p, params.q
    x_alpha = np.asarray(x_alpha, dtype=complex)
    x_beta = np.asarray(x_beta, dtype=complex)
    base = p + q * x_alpha * x_beta
    d = base - x_alpha
    dmin = float(np.min(np.abs(d))) if d.size else np.inf
    if dmin <= SINGULAR_TOL:
        raise SingularityError(*labels, dmin)
    S = -(base - x_beta) / d
    P = (p - q * x_alpha) * (x_beta - 1) / d
    Q = (p - q * x_beta) * (x_alpha - 1) / d
    T = (x_beta - x_alpha) / d
    return S, P, Q, T


def _scalars(beta, alpha, xi, params):
    return pair_scalars(_point(xi, alpha), _point(xi, beta), params, labels=(beta, alpha))


def scalar_S(beta, alpha, xi, params):
    return _scalars(beta, alpha, xi, params)[0]


def scalar_P(beta, alpha, xi, params):
    return _scalars(beta, alpha, xi, params)[1]


def scalar_Q(beta, alpha, xi, params):
    return _scalars(beta, alpha, xi, params)[2]


def scalar_T(beta, alpha, xi, params):
    return _scalars(beta, alpha, xi, params)[3]


def _two_letter(sector: Sector) -> Sector:
    if not isinstance(sector, Sector):
        sector = sector_of(sector)
    if sector.length != 2:
        raise ValueError(f"expected a two-letter sector, got {sector}")
    return sector


def r_block(sector2, beta, alpha, xi, params) -> AmplitudeBlock:
    """Block of ``R_{beta alpha}`` on a two-letter sector.

    ``[S]`` on ``[i,i]``; ``[[P, pT], [qT, Q]]`` on ``[i,j]`` (order ``ij, ji``).
    """
    sector2 = _two_letter(sector2)
    S, P, Q, T = (complex(v) for v in _scalars(beta, alpha, xi, params))
    if sector2.dim == 1:
        entries = np.array([[S]])
    else:
        entries = np.array([[P, params.p * T], [params.q * T, Q]])
    return AmplitudeBlock(sector2, entries)


def b_block(sector2, params) -> AmplitudeBlock:
    sector2 = _two_letter(sector2)
    if sector2.dim == 1:
        entries = np.array([[1.0]])
    else:
        p, q = params.p, params.q
        entries = np.array([[p, p], [q, q]])
    return AmplitudeBlock(sector2, entries)


def r_from_b(sector2, beta, alpha, xi, params) -> AmplitudeBlock:
    """``R_{beta alpha}`` obtained by solving the two-particle boundary equation."""
    sector2 = _two_letter(sector2)
    xa, xb = complex(_point(xi, alpha)), complex(_point(xi, beta))
    B = b_block(sector2, params).entries
    eye = np.eye(sector2.dim)
    c = params.p + params.q * xa * xb
    lhs = c * eye - xa * B
    if abs(np.linalg.det(lhs)) <= SINGULAR_TOL:
        raise SingularityError(beta, alpha, abs(np.linalg.det(lhs)))
    return AmplitudeBlock(sector2, -np.linalg.solve(lhs, c * eye - xb * B))


# -- tensor-position operators -------------------------------------------------

@lru_cache(maxsize=1024)
def _position_maps(sector: Sector, l: int):
    """Index arrays describing how ``T_l`` couples the words of ``sector``.

    Returns (equal, lower, lower_partner, upper, upper_partner): words whose
    letters at positions ``l, l+1`` are equal, increasing, decreasing, and
    for the latter two the rank of the word with those letters swapped.
    """
    equal, lower, lower_p, upper, upper_p = [], [], [], [], []
    for k, w in enumerate(sector):
        a, b = w[l - 1], w[l]
        if a == b:
            equal.append(k)
            continue
        swapped = w[:l - 1] + (b, a) + w[l + 1:]
        j = sector.rank(swapped)
        if a < b:
            lower.append(k)
            lower_p.append(j)
        else:
            upper.append(k)
            upper_p.append(j)
    as_idx = lambda v: np.asarray(v, dtype=np.intp)
    return tuple(map(as_idx, (equal, lower, lower_p, upper, upper_p)))


def _apply_with_scalars(vec, sector, l, scalars, params):
    S, P, Q, T = scalars
    equal, lower, lower_p, upper, upper_p = _position_maps(sector, l)
    vec = np.asarray(vec)
    shape = (vec.shape[0],) + np.broadcast_shapes(vec.shape[1:], np.shape(S))
    out = np.empty(shape, dtype=complex)
    if equal.size:
        out[equal] = S * vec[equal]
    if lower.size:
        out[lower] = P * vec[lower] + (params.p * T) * vec[lower_p]
    if upper.size:
        out[upper] = Q * vec[upper] + (params.q * T) * vec[upper_p]
    return out


def apply_T_l(vec, sector: Sector, l: int, beta, alpha, xi, params):
    """Apply ``I^(l-1) (x) R_{beta alpha} (x) I^(n-l-1)`` to a sector vector.

    ``vec`` has the sector on its leading axis; any further axes are
    carried along (scalars in ``xi`` broadcast against the trailing axes).
    """
    if not 1 <= l < sector.length:
        raise ValueError(f"position {l} out of range 1..{sector.length - 1}")
    return _apply_with_scalars(vec, sector, l, _scalars(beta, alpha, xi, params), params)


def t_block(sector: Sector, l: int, beta, alpha, xi, params) -> np.ndarray:
    """Dense ``dim x dim`` matrix of ``T_l(beta, alpha)`` on ``sector``."""
    return apply_T_l(np.eye(sector.dim, dtype=complex), sector, l, beta, alpha, xi, params)


class AmplitudeEvaluator:
    """Builds ``A_sigma`` actions at one spectral point, caching pair scalars.

    Parameters
    ----------
    xi : sequence
        ``N`` spectral values (scalars or mutually broadcastable arrays).
    params : SystemParams
    """

    def __init__(self, xi: Sequence, params: SystemParams):
        self.xi = list(xi)
        self.params = params
        self._pairs: dict[tuple[int, int], tuple] = {}

    @property
    def n(self) -> int:
        return len(self.xi)

    @property
    def batch_ndim(self) -> int:
        return max(np.ndim(x) for x in self.xi)

    def scalars(self, beta: int, alpha: int):
        key = (beta, alpha)
        if key not in self._pairs:
            self._pairs[key] = _scalars(beta, alpha, self.xi, self.params)
        return self._pairs[key]

    def apply(self, vec, sector: Sector, l: int, beta: int, alpha: int):
        return _apply_with_scalars(vec, sector, l, self.scalars(beta, alpha), self.params)

    def transport(self, vec, sector: Sector, path: TranspositionPath):
        for a, (beta, alpha) in zip(path.word, path.pairs):
            vec = self.apply(vec, sector, a, beta, alpha)
        return vec

    def column(self, sigma, nu, path: TranspositionPath | None = None):
        """``A_sigma e_nu`` as a sector vector (leading axis over ``sector_of(nu)``)."""
        sigma = check_permutation(sigma)
        nu = parse_word(nu)
        if len(nu) != len(sigma) or len(sigma) != self.n:
            raise ValueError(f"degree mismatch: sigma {len(sigma)}, word {len(nu)}, point {self.n}")
        sector = sector_of(nu)
        path = path or decompose(sigma)
        _check_path(path, sigma)
        vec = np.zeros((sector.dim,) + (1,) * self.batch_ndim, dtype=complex)
        vec[sector.rank(nu)] = 1.0
        return self.transport(vec, sector, path)

    def block(self, sigma, sector: Sector, path: TranspositionPath | None = None):
        """Dense sector block of ``A_sigma``; columns are ``A_sigma e_nu``."""
        sigma = check_permutation(sigma)
        if sector.length != len(sigma) or len(sigma) != self.n:
            raise ValueError("degree mismatch between sigma, sector and spectral point")
        path = path or decompose(sigma)
        _check_path(path, sigma)
        eye = np.eye(sector.dim, dtype=complex).reshape((sector.dim,) * 2 + (1,) * self.batch_ndim)
        return self.transport(eye, sector, path)

    def scalar(self, sigma, path: TranspositionPath | None = None):
        """Single-species amplitude: product of ``S`` over the inversions of ``sigma``.

        Factors are taken in the order the path creates the inversions, and
        multiplied as ``S * vec`` on a length-one vector like sector transport
        does; SIMD loops may fuse operations, so the layout decides the last ulp.
        """
        sigma = check_permutation(sigma)
        path = path or decompose(sigma)
        _check_path(path, sigma)
        out = np.ones((1,) + (1,) * self.batch_ndim, dtype=complex)
        for beta, alpha in path.pairs:
            out = self.scalars(beta, alpha)[0] * out
        return out[0]


def _check_path(path: TranspositionPath, sigma):
    if path.target != tuple(sigma):
        raise ValueError(f"path reaches {path.target}, not {tuple(sigma)}")


def amplitude_column(sigma, nu, xi, params, path=None):
    return AmplitudeEvaluator(xi, params).column(sigma, nu, path)


def amplitude_block(sigma, sector: Sector, xi, params, path=None) -> AmplitudeBlock:
    return AmplitudeBlock(sector, AmplitudeEvaluator(xi, params).block(sigma, sector, path))


def amplitude_element(sigma, pi, nu, xi, params, path=None):
    """``<e_pi, A_sigma e_nu>``; exactly zero across different sectors."""
    pi, nu = parse_word(pi), parse_word(nu)
    sector = sector_of(nu)
    if len(pi) != len(nu):
        raise ValueError("words of different length")
    if pi not in sector:
        return 0j
    return AmplitudeEvaluator(xi, params).column(sigma, nu, path)[sector.rank(pi)]


def scalar_amplitude(sigma, xi, params, path=None):
    return AmplitudeEvaluator(xi, params).scalar(sigma, path)
