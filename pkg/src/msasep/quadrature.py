"""Trapezoidal quadrature of N-fold contour integrals over a centred circle.

Every integral here carries the ``1/(2 pi i)`` normalisation: with nodes
``xi_m = r exp(2 pi i m / M)`` and weights ``xi_m / M`` the rule is exact
for ``xi**k`` whenever ``-M < k + 1 < M``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bethe import SystemParams

__all__ = [
    "ContourSpec", "QuadratureResult", "ConvergenceError",
    "max_radius", "default_radius", "contour_nodes", "trapezoid", "integrate",
    "monomial_window", "MAX_PARTICLES",
]

MAX_PARTICLES = 5
DEFAULT_NODES = 32
DEFAULT_MAX_NODES = 512
DEFAULT_TOL = 1e-9
RADIUS_FRACTION = 0.5
# grid points evaluated per chunk; bounds peak memory of evaluator output
CHUNK_POINTS = 1 << 20


class ConvergenceError(RuntimeError):
    def __init__(self, message, last, previous, nodes):
        super().__init__(message)
        self.last, self.previous, self.nodes = last, previous, nodes


def max_radius(params: SystemParams) -> float:
    """Open upper bound on the contour radius: positive root of ``q r^2 + r - p``."""
    p, q = params.p, params.q
    return (-1.0 + math.sqrt(1.0 + 4.0 * p * q)) / (2.0 * q)


def default_radius(params: SystemParams, fraction: float = RADIUS_FRACTION) -> float:
    return fraction * max_radius(params)


@dataclass(frozen=True)
class ContourSpec:
    radius: float
    nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if self.nodes < 8 or self.nodes % 2:
            raise ValueError(f"node count must be even and >= 8, got {self.nodes}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")

    def validate(self, params: SystemParams) -> "ContourSpec":
        bound = max_radius(params)
        if not self.radius < bound:
            raise ValueError(f"radius {self.radius} is not below the admissible bound {bound:.12g} "
                             f"for p = {params.p}")
        return self

    def refined(self) -> "ContourSpec":
        return ContourSpec(self.radius, 2 * self.nodes)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | np.ndarray
    error: float
    nodes: int
    radius: float


def contour_nodes(spec: ContourSpec) -> tuple[np.ndarray, np.ndarray]:
    m = np.arange(spec.nodes)
    xi = spec.radius * np.exp(2j * np.pi * m / spec.nodes)
    return xi, xi / spec.nodes


def _open_grid(values: np.ndarray, n: int, axis: int) -> np.ndarray:
    shape = [1] * n
    shape[axis] = values.size
    return values.reshape(shape)


def _slabs(M: int, n: int, chunk_points: int) -> list[slice]:
    step = max(1, min(M, chunk_points // M ** (n - 1)))
    return [slice(start, start + step) for start in range(0, M, step)]


def _reduce(work, slabs, workers):
    """Sum ``work(slab)`` over slabs in slab order, whatever the worker count."""
    if workers is None or workers <= 1 or len(slabs) == 1:
        parts = map(work, slabs)
        total = None
        for part in parts:
            total = part if total is None else total + part
        return total
    total = None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # bounded look-ahead keeps at most ``workers`` slabs in memory
        for k in range(0, len(slabs), workers):
            for part in pool.map(work, slabs[k:k + workers]):
                total = part if total is None else total + part
    return total


def trapezoid(evaluator: Callable[[list[np.ndarray]], np.ndarray], n: int,
              spec: ContourSpec, chunk_points: int = CHUNK_POINTS, workers: int | None = None):
    """Tensor-grid trapezoid sum at fixed node count.

    ``evaluator`` receives ``n`` open-mesh arrays (variable ``j`` varies
    along axis ``j``) and returns an array whose trailing ``n`` axes
    broadcast against the grid; leading axes are returned unreduced.
    """
    if not 1 <= n <= MAX_PARTICLES:
        raise ValueError(f"tensor-grid integration supports 1..{MAX_PARTICLES} variables, got {n}")
    xi, w = contour_nodes(spec)
    grids = [_open_grid(xi, n, j) for j in range(n)]
    weights = _open_grid(w, n, 0)
    for j in range(1, n):
        weights = weights * _open_grid(w, n, j)
    axes = tuple(range(-n, 0))

    def work(sl):
        return np.sum(evaluator([grids[0][sl]] + grids[1:]) * weights[sl], axis=axes)
    return _reduce(work, _slabs(spec.nodes, n, chunk_points), workers)


def integrate(evaluator, n: int, params: SystemParams, radius: float | None = None,
              nodes: int = DEFAULT_NODES, max_nodes: int = DEFAULT_MAX_NODES,
              tol: float = DEFAULT_TOL, chunk_points: int = CHUNK_POINTS,
              workers: int | None = None) -> QuadratureResult:
    """Trapezoid sums with node doubling until two successive results agree.

    Agreement means ``max|I_2M - I_M| <= tol * max(1, max|I_2M|)``. Raises
    :class:`ConvergenceError` if ``max_nodes`` is reached first.
    """
    if 2 * nodes > max_nodes:
        raise ValueError(f"max_nodes {max_nodes} leaves no room to refine from {nodes}")
    spec = ContourSpec(default_radius(params) if radius is None else radius, nodes).validate(params)
    previous = trapezoid(evaluator, n, spec, chunk_points, workers)
    older = None
    while spec.nodes * 2 <= max_nodes:
        spec = spec.refined()
        current = trapezoid(evaluator, n, spec, chunk_points, workers)
        diff = float(np.max(np.abs(current - previous)))
        if diff <= tol * max(1.0, float(np.max(np.abs(current)))):
            return QuadratureResult(current, diff, spec.nodes, spec.radius)
        older, previous = previous, current
    raise ConvergenceError(f"no convergence by M = {spec.nodes} (last change {diff:.3g})",
                           previous, older, spec.nodes)


def monomial_window(evaluator, n: int, spec: ContourSpec, lo: Sequence[int], hi: Sequence[int],
                    chunk_points: int = CHUNK_POINTS, workers: int | None = None) -> np.ndarray:
    """Integrals of ``F(xi) prod_j xi_j**k_j`` for every ``lo[j] <= k_j <= hi[j]``.

    One pass over the grid serves every exponent vector in the box: each
    slab of the first variable is contracted against per-variable
    Vandermonde matrices. Returns an array of shape
    ``(*leading, hi[0]-lo[0]+1, ..., hi[n-1]-lo[n-1]+1)`` where ``leading``
    are the evaluator's own leading axes.
    """
    if not 1 <= n <= MAX_PARTICLES:
        raise ValueError(f"tensor-grid integration supports 1..{MAX_PARTICLES} variables, got {n}")
    xi, w = contour_nodes(spec)
    M = spec.nodes
    # vander[j][k, m] = w_m * xi_m**(lo_j + k)
    vander = [w[None, :] * xi[None, :] ** np.arange(lo[j], hi[j] + 1)[:, None] for j in range(n)]
    grids = [_open_grid(xi, n, j) for j in range(n)]

    def work(sl):
        values = evaluator([grids[0][sl]] + grids[1:])
        shape = values.shape[:values.ndim - n] + (len(xi[sl]),) + (M,) * (n - 1)
        values = np.broadcast_to(values, shape)
        for j in range(n - 1, -1, -1):
            V = vander[j][:, sl] if j == 0 else vander[j]
            values = np.moveaxis(np.moveaxis(values, j - n, -1) @ V.T, -1, j - n)
        return values
    return _reduce(work, _slabs(M, n, chunk_points), workers)
