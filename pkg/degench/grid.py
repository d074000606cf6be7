"""Mapped Chebyshev-Lobatto collocation on the truncated radial domain.

Reference nodes x in [-1, 1] are stretched by the arctan map, which clusters
points around r = 1/2, and then mapped linearly onto [r_min, 1]. Node index 0
is r = 1 and the last node is r = r_min.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import BarycentricInterpolator
from scipy.linalg import toeplitz

from degench.errors import InvalidArgument

logger = logging.getLogger(__name__)

DEFAULT_R_MIN = 1e-10
DELTA_PER_EPSILON = 10.0


def lobatto_points(n: int) -> np.ndarray:
    """The n Chebyshev-Lobatto points cos(pi k/(n-1)), k = 0..n-1."""
    if n < 2:
        raise InvalidArgument(f"need at least 2 Lobatto points, got {n}")
    # sin form keeps the nodes exactly antisymmetric
    return np.sin(math.pi * np.arange(n - 1, -n, -2) / (2.0 * (n - 1)))


def reference_diff_matrices(n: int, order: int = 2) -> list[np.ndarray]:
    """Differentiation matrices D1..D_order on the n Lobatto points.

    Off-diagonals use the trigonometric form of x_k - x_j with the flipping
    trick; diagonals use the negative row sum.
    """
    if n < 2:
        raise InvalidArgument(f"need at least 2 Lobatto points, got {n}")
    if not 0 < order < n:
        raise InvalidArgument(f"derivative order must lie in [1, {n - 1}], got {order}")

    n1, n2 = n // 2, int(math.ceil(n / 2.0))
    k = np.arange(n)
    th = k * math.pi / (n - 1)

    T = np.tile(th / 2.0, (n, 1))
    DX = 2.0 * np.sin(T.T + T) * np.sin(T - T.T)
    DX[n1:, :] = -np.flipud(np.fliplr(DX[:n2, :]))
    np.fill_diagonal(DX, 1.0)

    Z = 1.0 / DX
    np.fill_diagonal(Z, 0.0)

    C = toeplitz((-1.0) ** k)
    C[0, :] *= 2.0
    C[-1, :] *= 2.0
    C[:, 0] *= 0.5
    C[:, -1] *= 0.5

    matrices = []
    D = np.eye(n)
    for ell in range(order):
        D = (ell + 1) * Z * (C * np.tile(np.diag(D)[:, None], (1, n)) - D)
        np.fill_diagonal(D, -np.sum(D, axis=1))
        matrices.append(D)
    return matrices


def reference_diff_matrix(n: int) -> np.ndarray:
    return reference_diff_matrices(n, 1)[0]


def clenshaw_curtis_weights(n: int) -> np.ndarray:
    """Quadrature weights on the n Lobatto points for integrals over [-1, 1]."""
    N = n - 1
    theta = math.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    inner = slice(1, N)
    v = np.ones(N - 1)
    if N % 2 == 0:
        w[0] = w[N] = 1.0 / (N**2 - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k**2 - 1)
        v -= np.cos(N * theta[inner]) / (N**2 - 1)
    else:
        w[0] = w[N] = 1.0 / N**2
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[inner]) / (4 * k**2 - 1)
    w[inner] = 2.0 * v / N
    return w


def _check_delta(delta: float) -> None:
    if not delta > 0:
        raise InvalidArgument(f"stretch delta must be positive, got {delta}")
    if delta >= 1:
        warnings.warn(f"stretch delta={delta} >= 1 spreads nodes away from the centre", stacklevel=3)


def arctan_map(x, delta: float):
    """r = 1/2 + arctan(delta tan(pi x/2))/pi, with r(-1) = 0 and r(1) = 1 exactly."""
    _check_delta(delta)
    x = np.asarray(x, dtype=float)
    half = 0.5 * math.pi * x
    r = 0.5 + np.arctan2(delta * np.sin(half), np.cos(half)) / math.pi
    r = np.where(x == 1.0, 1.0, np.where(x == -1.0, 0.0, r))
    return float(r) if r.ndim == 0 else r


def arctan_map_derivatives(x, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """dr/dx and d2r/dx2 of the arctan map, finite at the endpoints."""
    x = np.asarray(x, dtype=float)
    half = 0.5 * math.pi * x
    g = np.cos(half) ** 2 + delta**2 * np.sin(half) ** 2
    first = 0.5 * delta / g
    second = -0.25 * math.pi * delta * (delta**2 - 1.0) * np.sin(math.pi * x) / g**2
    return first, second


def inverse_arctan_map(r, delta: float):
    r = np.asarray(r, dtype=float)
    phase = math.pi * (r - 0.5)
    return 2.0 / math.pi * np.arctan2(np.sin(phase), delta * np.cos(phase))


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    n_points: int
    nodes_reference: np.ndarray
    nodes_physical: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    delta: float
    r_min: float
    weights: np.ndarray

    @property
    def r(self) -> np.ndarray:
        return self.nodes_physical

    def to_reference(self, r):
        s = (np.asarray(r, dtype=float) - self.r_min) / (1.0 - self.r_min)
        return inverse_arctan_map(s, self.delta)

    @cached_property
    def inv_r(self) -> np.ndarray:
        inv = 1.0 / self.nodes_physical
        inv.setflags(write=False)
        return inv

    @cached_property
    def laplacian(self) -> np.ndarray:
        """Radial Laplacian (1/r)(r u_r)_r; the origin row uses the limit 2 u_rr."""
        L = self.d2 + self.inv_r[:, None] * self.d1
        L[-1, :] = 2.0 * self.d2[-1, :]
        L.setflags(write=False)
        return L

    @cached_property
    def divergence(self) -> np.ndarray:
        """Radial divergence (1/r)(r F)_r acting on nodal fluxes F."""
        G = self.d1 + np.diag(self.inv_r)
        G[-1, :] = 2.0 * self.d1[-1, :]
        G.setflags(write=False)
        return G

    @cached_property
    def d1_squared(self) -> np.ndarray:
        return self.d1 @ self.d1

    def integrate(self, values) -> float:
        """Clenshaw-Curtis approximation of the integral over [r_min, 1] in dr."""
        return float(self.weights @ np.asarray(values, dtype=float))

    def mass(self, u) -> float:
        return self.integrate(np.asarray(u) * self.nodes_physical)

    def contains(self, r) -> bool:
        r = np.asarray(r, dtype=float)
        tol = 1e-14
        return bool(np.all((r >= self.r_min - tol) & (r <= 1.0 + tol)))

    def interpolant(self, values) -> Callable:
        """Barycentric interpolant of nodal values, callable on physical radii."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_points,):
            raise InvalidArgument(f"expected {self.n_points} nodal values, got shape {values.shape}")
        bary = BarycentricInterpolator(self.nodes_reference, values)
        nodes = self.nodes_physical

        def evaluate(r_query):
            if not self.contains(r_query):
                raise InvalidArgument(f"query radius outside [{self.r_min}, 1]: {r_query}")
            rq = np.atleast_1d(np.asarray(r_query, dtype=float))
            out = np.asarray(bary(self.to_reference(rq)), dtype=float)
            hits = rq[:, None] == nodes[None, :]
            rows, cols = np.nonzero(hits)
            out[rows] = values[cols]
            return float(out[0]) if np.ndim(r_query) == 0 else out

        return evaluate


def build_grid(
    n: int,
    epsilon: float,
    r_min: float = DEFAULT_R_MIN,
    delta: float | None = None,
) -> SpectralGrid:
    """Compose Lobatto nodes, the arctan stretch (delta = 10 eps) and the truncation map."""
    if n < 8:
        raise InvalidArgument(f"grid needs at least 8 points, got {n}")
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    if not 0 < r_min < 1:
        raise InvalidArgument(f"r_min must lie in (0, 1), got {r_min}")
    if delta is None:
        delta = DELTA_PER_EPSILON * epsilon
    _check_delta(delta)

    x = lobatto_points(n)
    D1, D2 = reference_diff_matrices(n, 2)

    s = arctan_map(x, delta)
    ds, dds = arctan_map_derivatives(x, delta)
    scale = 1.0 - r_min
    r = r_min + scale * s
    r[0], r[-1] = 1.0, r_min
    dr = scale * ds
    ddr = scale * dds

    d1 = D1 / dr[:, None]
    d2 = D2 / dr[:, None] ** 2 - (ddr / dr**3)[:, None] * D1
    weights = clenshaw_curtis_weights(n) * dr

    for array in (x, r, d1, d2, weights):
        array.setflags(write=False)

    logger.debug("Built grid n=%d delta=%.4g r_min=%.1e", n, delta, r_min)
    return SpectralGrid(
        n_points=n,
        nodes_reference=x,
        nodes_physical=r,
        d1=d1,
        d2=d2,
        delta=delta,
        r_min=r_min,
        weights=weights,
    )


def interpolate(grid: SpectralGrid, values, r_query):
    """Evaluate the barycentric interpolant of nodal values at r_query."""
    return grid.interpolant(values)(r_query)
