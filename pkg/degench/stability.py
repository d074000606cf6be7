"""Azimuthal-mode relaxation of a frozen radially symmetric base state.

The perturbation v cos(m theta) obeys

    v_t = (1/r)(r M(v0) w_r)_r - (m^2/r^2) M(v0) w
    w   = -eps^2 [(1/r)(r v_r)_r - (m^2/r^2) v] + f''(v0) v

which is marched with backward Euler on the collocation grid. The decay rate
of max|v| is fitted and compared with the sharp-interface predictions.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import pandas as pd
from scipy.linalg import LinAlgError, lu_factor, lu_solve

from degench.asymptotics import analytic_rates, asymptotic_bundle
from degench.config import SolverConfig, StabilityConfig
from degench.errors import InvalidArgument, NoConvergence, NotQuasiStationary, NumericalError, UnstableMode
from degench.grid import SpectralGrid, build_grid
from degench.mobility import MobilityKind, potential_second
from degench.solver import CahnHilliardSolver, PhaseFieldState, initial_state, measure_interface

logger = logging.getLogger(__name__)

INTERFACE_TOLERANCE = 0.02
SLOPE_TOLERANCE = 0.01
REFERENCE_FRACTION = 0.1
ACCEPTED_RESIDUAL = 0.01
MIN_WINDOW_POINTS = 5


@dataclass(frozen=True)
class TableSpec:
    table_id: int
    mobility: MobilityKind
    initial_amplitude: float
    comparison: str
    published_values: dict[float, float]


TABLES: dict[int, TableSpec] = {
    1: TableSpec(
        1, MobilityKind.QUADRATIC_POSITIVE_PART, 1.0, "one_sided",
        {0.01: -133.2, 0.005: -133.8, 0.003: -136.0, 0.002: -136.3, 0.001: -137.0},
    ),
    2: TableSpec(
        2, MobilityKind.ABSOLUTE_VALUE, 1.1, "two_sided",
        {0.01: -144.7, 0.005: -146.3, 0.002: -147.5, 0.001: -147.8},
    ),
    3: TableSpec(
        3, MobilityKind.BIQUADRATIC_POSITIVE_PART, 1.0, "pure",
        {0.01: -84.6, 0.005: -84.7, 0.001: -85.2},
    ),
}


def table_spec(table_id) -> TableSpec:
    try:
        return TABLES[int(table_id)]
    except (KeyError, ValueError, TypeError):
        raise InvalidArgument(f"unknown table id {table_id!r}; expected one of {sorted(TABLES)}") from None


@dataclass(frozen=True, eq=False)
class LinearizedProblem:
    base_state: np.ndarray
    m: int
    epsilon: float
    mobility: MobilityKind
    grid: SpectralGrid

    def __post_init__(self):
        base = np.array(self.base_state, dtype=float)
        if base.shape != (self.grid.n_points,):
            raise InvalidArgument(f"base state has shape {base.shape}, grid has {self.grid.n_points} nodes")
        if int(self.m) != self.m or self.m < 0:
            raise InvalidArgument(f"mode m must be a non-negative integer, got {self.m}")
        base.setflags(write=False)
        object.__setattr__(self, "base_state", base)
        object.__setattr__(self, "mobility", MobilityKind.parse(self.mobility))

    @cached_property
    def frozen_mobility(self) -> np.ndarray:
        return self.mobility(self.base_state)

    @cached_property
    def flux_operator(self) -> np.ndarray:
        """w -> (1/r)(r M w_r)_r - (m^2/r^2) M w, with zero flux at both ends."""
        g = self.grid
        mob = self.frozen_mobility
        masked = mob.copy()
        masked[[0, -1]] = 0.0
        K = g.divergence @ (masked[:, None] * g.d1)
        K -= np.diag(self.m**2 * g.inv_r**2 * mob)
        return K

    @cached_property
    def potential_operator(self) -> np.ndarray:
        """v -> -eps^2 [(1/r)(r v_r)_r - (m^2/r^2) v] + f''(v0) v."""
        g = self.grid
        shift = (self.m * self.epsilon * g.inv_r) ** 2 + potential_second(self.base_state)
        return -self.epsilon**2 * g.laplacian + np.diag(shift)

    def system_matrix(self, dt: float) -> np.ndarray:
        g, n = self.grid, self.grid.n_points
        A = np.zeros((2 * n, 2 * n))
        A[:n, :n] = np.eye(n)
        A[:n, n:] = -dt * self.flux_operator
        A[n:, :n] = -self.potential_operator
        A[n:, n:] = np.eye(n)
        for row in (0, n - 1):
            A[row, :] = 0.0
            A[row, n:] = g.d1[row]
            A[n + row, :] = 0.0
            A[n + row, :n] = g.d1[row]
        return A


@dataclass(frozen=True)
class DecayRateRecord:
    m: Optional[int]
    r0: Optional[float]
    epsilon: float
    mobility: Optional[str]
    lambda_measured: float
    fit_window: tuple[float, float]
    fit_residual: float
    lambda_analytic: dict[str, float] = field(default_factory=dict)
    raw_slope: float = math.nan

    def to_dict(self) -> dict:
        data = asdict(self)
        data["fit_window"] = list(self.fit_window)
        return data


def prepare_base_state(
    epsilon: float,
    mobility: MobilityKind | str,
    r0_target: float,
    config: Optional[StabilityConfig] = None,
) -> PhaseFieldState:
    """Quasi-stationary radial state with its interface at r0_target."""
    config = (config or StabilityConfig(r0=r0_target)).validate()
    mobility = MobilityKind.parse(mobility)
    grid = build_grid(config.n_points, epsilon, config.r_min)

    if config.base_state == "shooting":
        if mobility is MobilityKind.ABSOLUTE_VALUE:
            raise InvalidArgument("the shooting base state has u <= 1 and cannot represent the abs mobility")
        from degench.stationary import solve_stationary

        sol = solve_stationary(r0_target, epsilon, config.r_min)
        state = PhaseFieldState(grid, sol(grid.nodes_physical), 0.0, epsilon, mobility)
        logger.info("Base state from shooting: eps=%g r*=%.6f", epsilon, sol.r_star)
    else:
        start = initial_state(grid, epsilon, mobility, r0_target, config.initial_amplitude)
        solver = CahnHilliardSolver(
            grid, epsilon, mobility,
            SolverConfig(dt=config.base_dt, n_points=config.n_points, r_min=config.r_min),
        )
        state, rate = solver.relax(start, config.base_tolerance, t_max=10.0 / epsilon)
        if not rate < config.base_tolerance:
            raise NotQuasiStationary(
                f"max|u_t|={rate:.3g} still above {config.base_tolerance:g} at t={state.time:.6g}"
            )
    r0 = measure_interface(state)
    if abs(r0 - r0_target) > INTERFACE_TOLERANCE:
        raise NotQuasiStationary(f"interface drifted to r0={r0:.6f}, target {r0_target}")
    return state


def initial_perturbation(
    grid: SpectralGrid,
    r0: float,
    a: float,
    r_star: Optional[float] = None,
) -> np.ndarray:
    """Smooth bump exp(-1/(a^2 - (r - r0)^2)) supported on |r - r0| < a, scaled to max 1."""
    if not a > 0:
        raise InvalidArgument(f"support half-width must be positive, got {a}")
    if r_star is not None and not r0 - a > r_star:
        raise InvalidArgument(f"support [{r0 - a:.6f}, {r0 + a:.6f}] reaches the free boundary r*={r_star:.6f}")
    if not (grid.r_min < r0 - a and r0 + a < 1.0):
        raise InvalidArgument(f"support [{r0 - a:.6f}, {r0 + a:.6f}] leaves the domain")
    d = grid.nodes_physical - r0
    inside = np.abs(d) < a
    bump = np.zeros_like(d)
    di = d[inside]
    bump[inside] = np.exp(-di**2 / (a**2 * (a**2 - di**2)))
    return bump


def evolve_linearized(
    problem: LinearizedProblem,
    v1_init: np.ndarray,
    config: StabilityConfig,
) -> pd.DataFrame:
    """March the linear system and record max|v| every ``record_every`` steps.

    Stops early once the amplitude falls below ``floor`` times its initial value.
    """
    n = problem.grid.n_points
    v = np.array(v1_init, dtype=float)
    if v.shape != (n,):
        raise InvalidArgument(f"perturbation has shape {v.shape}, grid has {n} nodes")
    dt = config.dt
    horizon = config.horizon(problem.epsilon)
    n_steps = max(1, int(round(horizon / dt)))
    a0 = float(np.max(np.abs(v)))
    if a0 == 0.0:
        return pd.DataFrame({"t": [0.0, n_steps * dt], "max_v1": [0.0, 0.0]})

    try:
        lu = lu_factor(problem.system_matrix(dt))
    except (LinAlgError, ValueError) as exc:
        raise NumericalError(f"factorisation of the linearised operator failed: {exc}") from exc

    rhs = np.zeros(2 * n)
    boundary = [0, n - 1, n, 2 * n - 1]
    times, amps = [0.0], [a0]
    for k in range(1, n_steps + 1):
        rhs[:n] = v
        rhs[n:] = 0.0
        rhs[boundary] = 0.0
        v = lu_solve(lu, rhs)[:n]
        amp = float(np.max(np.abs(v)))
        if not math.isfinite(amp) or amp > config.growth_limit * a0:
            raise UnstableMode(f"perturbation grew to {amp:.3g} x initial at t={k * dt:.6g} (m={problem.m})")
        done = amp < config.floor * a0
        if k % config.record_every == 0 or k == n_steps or done:
            times.append(k * dt)
            amps.append(amp)
        if done:
            logger.info("Amplitude reached floor at t=%.6g after %d steps", k * dt, k)
            break
    return pd.DataFrame({"t": times, "max_v1": amps})


def fit_decay_rate(
    series: pd.DataFrame,
    epsilon: float,
    dt: Optional[float] = None,
    m: Optional[int] = None,
    r0: Optional[float] = None,
    mobility: Optional[MobilityKind | str] = None,
) -> DecayRateRecord:
    """Fit log max|v| over the late window where the local slope is steady.

    With ``dt`` the slope is converted from the backward-Euler amplification
    to a continuous rate. The rate is reported scaled by 1/eps^2.
    """
    t = series["t"].to_numpy(dtype=float)
    amp = series["max_v1"].to_numpy(dtype=float)
    keep = amp > 0
    t, y = t[keep], np.log(amp[keep])
    if t.size < 2 * MIN_WINDOW_POINTS:
        raise NoConvergence(f"series has only {t.size} positive samples")

    half = t.size // 2
    spans_efolds = y[half] - y[-1] >= 3.0
    reaches_horizon = t[-1] >= (1.0 - 1e-9) / epsilon**2
    if not (spans_efolds or reaches_horizon):
        raise NoConvergence(f"last half of the series drops {y[half] - y[-1]:.2f} e-folds before t={t[-1]:.6g}")

    slopes = np.gradient(y, t)
    tail = max(3, int(math.ceil(REFERENCE_FRACTION * t.size)))
    reference = float(np.median(slopes[-tail:]))
    steady = np.abs(slopes - reference) <= SLOPE_TOLERANCE * abs(reference)
    unsteady = np.flatnonzero(~steady)
    start = int(unsteady[-1]) + 1 if unsteady.size else 0
    if t.size - start < MIN_WINDOW_POINTS:
        raise NoConvergence("no window with a steady log-slope")

    window = slice(start, None)
    slope, intercept = np.polyfit(t[window], y[window], 1)
    residual = float(np.sqrt(np.mean((y[window] - (slope * t[window] + intercept)) ** 2)))
    if residual >= ACCEPTED_RESIDUAL:
        raise NoConvergence(f"log-linear fit residual {residual:.3g} exceeds {ACCEPTED_RESIDUAL}")

    rate = float(slope)
    if dt is not None:
        rate = -math.expm1(-slope * dt) / dt
    analytic = {}
    if mobility is not None and m is not None and r0 is not None:
        analytic = analytic_rates(mobility, m, r0)
    return DecayRateRecord(
        m=m,
        r0=r0,
        epsilon=float(epsilon),
        mobility=MobilityKind.parse(mobility).value if mobility is not None else None,
        lambda_measured=rate / epsilon**2,
        fit_window=(float(t[start]), float(t[-1])),
        fit_residual=residual,
        lambda_analytic=analytic,
        raw_slope=float(slope),
    )


def measure_decay_rate(
    epsilon: float,
    mobility: MobilityKind | str,
    config: StabilityConfig,
    base: Optional[PhaseFieldState] = None,
) -> tuple[DecayRateRecord, pd.DataFrame]:
    """Base state, bump perturbation, linear march and fit for one case."""
    config = config.validate()
    mobility = MobilityKind.parse(mobility)
    base = base or prepare_base_state(epsilon, mobility, config.r0, config)
    r0 = measure_interface(base)
    bundle = asymptotic_bundle(epsilon, 1.0 / config.r0)
    problem = LinearizedProblem(base.u, config.m, epsilon, mobility, base.grid)
    v1 = initial_perturbation(base.grid, r0, config.half_width(epsilon), r_star=bundle.r_star)
    series = evolve_linearized(problem, v1, config)
    record = fit_decay_rate(series, epsilon, dt=config.dt, m=config.m, r0=config.r0, mobility=mobility)
    logger.info("Measured lambda=%.4f for m=%d eps=%g (%s)", record.lambda_measured, config.m, epsilon, mobility.value)
    return record, series


def reproduce_table(
    table_id: int,
    epsilons: list[float],
    config: Optional[StabilityConfig] = None,
    workers: int = 1,
) -> pd.DataFrame:
    """Measured against analytic rates for each epsilon of one table."""
    from degench.graph import run_table_workflow

    table = table_spec(table_id)
    final = run_table_workflow(table.table_id, [float(e) for e in epsilons], config, workers)
    return pd.DataFrame(final["report"])
