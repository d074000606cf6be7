"""Radially symmetric degenerate Cahn-Hilliard solver.

    u_t = (1/r)(r M(u) mu_r)_r,   mu = -eps^2 (1/r)(r u_r)_r + f'(u)

The mobility coefficient is lagged at u^n and the flux acts implicitly on
mu^{n+1}. With splitting enabled the coefficient is written as
(M(u^n) - theta) + theta and the two parts are assembled separately. The
potential is linearised with a stabilisation constant S. Unknowns (u, mu) are solved together, with
the boundary equations replaced by u_r = 0 and mu_r = 0 at both ends.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, solve
from scipy.optimize import bisect

from degench.config import SolverConfig
from degench.errors import Diverged, InvalidArgument, NoInterface, NumericalError
from degench.grid import SpectralGrid
from degench.mobility import MobilityKind, potential, potential_prime, potential_second

logger = logging.getLogger(__name__)

BLOW_UP_THRESHOLD = 10.0

Observer = Callable[["PhaseFieldState"], dict]


@dataclass(frozen=True, eq=False)
class PhaseFieldState:
    grid: SpectralGrid
    u: np.ndarray
    time: float
    epsilon: float
    mobility: MobilityKind

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.shape != (self.grid.n_points,):
            raise InvalidArgument(f"u has shape {u.shape}, grid has {self.grid.n_points} nodes")
        if not self.epsilon > 0:
            raise InvalidArgument(f"epsilon must be positive, got {self.epsilon}")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "mobility", MobilityKind.parse(self.mobility))

    def with_u(self, u: np.ndarray, time: float) -> "PhaseFieldState":
        return replace(self, u=u, time=time)


def tanh_profile(grid: SpectralGrid, epsilon: float, r0: float = 0.5, amplitude: float = 1.0) -> np.ndarray:
    """-A tanh((r - r0)/eps), shifted so its mass equals that of the A = 1 profile."""
    r = grid.nodes_physical
    base = -np.tanh((r - r0) / epsilon)
    if amplitude == 1.0:
        return base
    scaled = amplitude * base
    shift = (grid.mass(base) - grid.mass(scaled)) / grid.mass(np.ones_like(r))
    return scaled + shift


def initial_state(
    grid: SpectralGrid,
    epsilon: float,
    mobility: MobilityKind | str,
    r0: float = 0.5,
    amplitude: float = 1.0,
) -> PhaseFieldState:
    return PhaseFieldState(grid, tanh_profile(grid, epsilon, r0, amplitude), 0.0, epsilon, mobility)


def chemical_potential(state: PhaseFieldState) -> np.ndarray:
    """mu = -eps^2 (1/r)(r u_r)_r + f'(u) on the nodes."""
    return -state.epsilon**2 * (state.grid.laplacian @ state.u) + potential_prime(state.u)


def energy(state: PhaseFieldState) -> float:
    """Ginzburg-Landau energy: integral of (eps^2/2 u_r^2 + f(u)) r dr."""
    ur = state.grid.d1 @ state.u
    density = 0.5 * state.epsilon**2 * ur**2 + potential(state.u)
    return state.grid.integrate(density * state.grid.nodes_physical)


def mass(state: PhaseFieldState) -> float:
    return state.grid.mass(state.u)


def measure_interface(state: PhaseFieldState) -> float:
    """Radius of the single zero of u, located by bisection on the interpolant."""
    u = state.u
    r = state.grid.nodes_physical
    crossings = np.flatnonzero(np.diff(np.signbit(u)))
    if crossings.size == 0:
        raise NoInterface("u does not change sign")
    if crossings.size > 1:
        raise NoInterface(f"u changes sign {crossings.size} times")
    i = int(crossings[0])
    lo, hi = r[i + 1], r[i]
    f = state.grid.interpolant(u)
    if u[i + 1] == 0.0:
        return float(lo)
    return float(bisect(f, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200))


def free_boundary_estimate(state: PhaseFieldState) -> float:
    """Radius where u comes closest to 1 inside the positive phase."""
    positive = state.u > 0
    if not positive.any():
        return math.nan
    idx = np.flatnonzero(positive)
    return float(state.grid.nodes_physical[idx[np.argmax(state.u[idx])]])


def default_observers() -> list[Observer]:
    def observe_mass(state):
        return {"mass": mass(state)}

    def observe_interface(state):
        try:
            r0 = measure_interface(state)
        except NoInterface:
            r0 = math.nan
        return {"r0": r0}

    def observe_extremes(state):
        return {"max_u": float(np.max(state.u)), "r_star": free_boundary_estimate(state)}

    def observe_energy(state):
        return {"energy": energy(state)}

    return [observe_mass, observe_interface, observe_extremes, observe_energy]


def snapshot(state: PhaseFieldState) -> pd.DataFrame:
    return pd.DataFrame({"r": state.grid.nodes_physical, "u": state.u, "mu": chemical_potential(state)})


class CahnHilliardSolver:
    """Semi-implicit stepper bound to one grid, interface width and mobility.

    Each step lags the mobility coefficient at u^n and solves for
    (u^{n+1}, mu^{n+1}) together, so the operator is assembled every step.
    """

    def __init__(self, grid: SpectralGrid, epsilon: float, mobility: MobilityKind | str, config: SolverConfig):
        self.grid = grid
        self.epsilon = epsilon
        self.mobility = MobilityKind.parse(mobility)
        self.config = config.resolve(epsilon)
        n = grid.n_points
        self._flux_mask = np.ones(n)
        self._flux_mask[[0, -1]] = 0.0
        self._theta_operator = self.theta * self.flux_operator(np.ones(n))

    @property
    def theta(self) -> float:
        return float(self.config.theta)

    def stabilization(self, u: np.ndarray) -> float:
        if self.config.stabilization_s is not None:
            return float(self.config.stabilization_s)
        return 2.0 * max(1.0, float(np.max(potential_second(u))))

    def flux_operator(self, coefficient: np.ndarray) -> np.ndarray:
        """(1/r)(r c mu_r)_r as a matrix acting on mu, with zero flux at both ends."""
        return self.grid.divergence @ ((self._flux_mask * coefficient)[:, None] * self.grid.d1)

    def mobility_operator(self, u: np.ndarray) -> np.ndarray:
        """The lagged mobility operator; with splitting, (M(u^n) - theta) plus the constant theta part."""
        mob = self.mobility(u)
        if self.config.mobility_splitting:
            return self.flux_operator(mob - self.theta) + self._theta_operator
        return self.flux_operator(mob)

    def _assemble(self, S: float, flux_operator: np.ndarray) -> np.ndarray:
        grid, n, dt = self.grid, self.grid.n_points, self.config.dt
        L, D1 = grid.laplacian, grid.d1
        A = np.zeros((2 * n, 2 * n))
        A[:n, :n] = np.eye(n)
        A[:n, n:] = -dt * flux_operator
        A[n:, :n] = self.epsilon**2 * L - S * np.eye(n)
        A[n:, n:] = np.eye(n)
        for row, node in ((0, 0), (n - 1, n - 1)):
            A[row, :] = 0.0
            A[row, n:] = D1[node]
            A[n + row, :] = 0.0
            A[n + row, :n] = D1[node]
        return A

    def step(self, state: PhaseFieldState) -> PhaseFieldState:
        n, dt = self.grid.n_points, self.config.dt
        u = state.u
        S = self.stabilization(u)

        rhs = np.concatenate([u, potential_prime(u) - S * u])
        rhs[[0, n - 1, n, 2 * n - 1]] = 0.0

        try:
            solution = solve(self._assemble(S, self.mobility_operator(u)), rhs, check_finite=True)
        except (LinAlgError, ValueError) as exc:
            raise NumericalError(f"linear solve failed at t={state.time:.6g}: {exc}") from exc

        u_new = solution[:n]
        if not np.all(np.isfinite(u_new)) or np.max(np.abs(u_new)) > BLOW_UP_THRESHOLD:
            raise Diverged(f"max|u| exceeded {BLOW_UP_THRESHOLD} at t={state.time + dt:.6g}")
        return state.with_u(u_new, state.time + dt)

    def run(
        self,
        initial: PhaseFieldState,
        t_end: Optional[float] = None,
        observers: Optional[Iterable[Observer]] = None,
    ) -> tuple[PhaseFieldState, pd.DataFrame]:
        t_end = self.config.t_end if t_end is None else t_end
        if t_end < initial.time:
            raise InvalidArgument(f"t_end={t_end} lies before the initial time {initial.time}")
        observers = default_observers() if observers is None else list(observers)
        n_steps = int(round((t_end - initial.time) / self.config.dt))
        stride = self.config.record_every

        def record(state):
            row = {"t": state.time}
            for observe in observers:
                row.update(observe(state))
            return row

        rows = [record(initial)]
        state = initial
        for k in range(1, n_steps + 1):
            state = self.step(state)
            if k % stride == 0 or k == n_steps:
                rows.append(record(state))
                logger.debug("t=%.4g max_u=%.6f", state.time, rows[-1].get("max_u", np.nan))
        logger.info("Ran %d steps to t=%.6g (%s, eps=%g)", n_steps, state.time, self.mobility.value, self.epsilon)
        return state, pd.DataFrame(rows)

    def relax(self, initial: PhaseFieldState, tolerance: float, t_max: float) -> tuple[PhaseFieldState, float]:
        """Step until max|u_t| < tolerance; returns the state and the last rate."""
        state = initial
        rate = math.inf
        dt = self.config.dt
        n_max = int(math.ceil((t_max - initial.time) / dt))
        for k in range(n_max):
            new = self.step(state)
            rate = float(np.max(np.abs(new.u - state.u))) / dt
            state = new
            if rate < tolerance:
                logger.info("Quasi-stationary after t=%.6g (max|u_t|=%.3g)", state.time, rate)
                break
            if k % 10000 == 0:
                logger.debug("relax t=%.6g max|u_t|=%.3g", state.time, rate)
        return state, rate


def step(state: PhaseFieldState, config: SolverConfig) -> PhaseFieldState:
    """Advance one time step. Builds a fresh stepper; use CahnHilliardSolver for long runs."""
    return CahnHilliardSolver(state.grid, state.epsilon, state.mobility, config).step(state)


def run(
    initial: PhaseFieldState,
    config: SolverConfig,
    observers: Optional[Iterable[Observer]] = None,
) -> tuple[PhaseFieldState, pd.DataFrame]:
    return CahnHilliardSolver(initial.grid, initial.epsilon, initial.mobility, config).run(
        initial, config.t_end, observers
    )
