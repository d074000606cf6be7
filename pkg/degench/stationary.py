"""Stationary radially symmetric free-boundary problem.

    eps^2 (1/r)(r u')' + eta - 2u(u^2 - 1) = 0,   u'(1) = 0,
    u(r*) = 1, u'(r*) = 0,                       u(r0) = 0

solved by shooting inward. The inner loop adjusts the start amplitude so the
trajectory lands on u = 1 with zero slope; the outer loop adjusts eta until
the zero of u sits at the requested radius.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import i0e, i1e, k0e, k1e

from degench.asymptotics import asymptotic_bundle
from degench.errors import InvalidArgument, NoSolution, NumericalError
from degench.grid import DEFAULT_R_MIN
from degench.mobility import potential_second

logger = logging.getLogger(__name__)

RTOL = 1e-10
ATOL = 1e-12
DENSE_POINTS = 2000
# the trajectory starts this many interface widths outside r0
START_OFFSET = 8.0
SCAN_SPAN = (-8.0, 8.0)
SCAN_POINTS = 65
MAX_START_OFFSET = 0.5
BLOW_OFF = -3.0
TURN_SLOPE = 1e-10
FREE_BOUNDARY_TOLERANCE = 1e-8
SETTLE_STEPS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)
# half-width of the eta bracket is capped so the predicted interface stays
# inside the start radius
ETA_BRACKET_FRACTION = 0.2
# noise floor of u(r0) between neighbouring eta evaluations
MONOTONE_SLACK = 1e-9


def outer_plateau(eta: float) -> float:
    """Constant outer state u_c near -1 with f'(u_c) = eta."""
    top = -1.0 / math.sqrt(3.0)
    peak = 2.0 * top**3 - 2.0 * top
    if not -4.0 < eta < peak:
        raise InvalidArgument(f"no outer plateau for eta={eta}; need eta < {peak:.6f}")
    return brentq(lambda u: 2.0 * u**3 - 2.0 * u - eta, -1.5, top, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class OuterTail:
    """Linearised outer solution u = u_c + c phi(r) with phi'(1) = 0.

    phi = K0(k r) + (K1(k)/I1(k)) I0(k r), k = sqrt(f''(u_c))/eps; evaluated
    in exponentially scaled form.
    """

    plateau: float
    k: float

    @classmethod
    def for_eta(cls, eta: float, epsilon: float) -> "OuterTail":
        u_c = outer_plateau(eta)
        return cls(u_c, math.sqrt(float(potential_second(u_c))) / epsilon)

    def _parts(self, r):
        x = self.k * np.asarray(r, dtype=float)
        b = k1e(self.k) / i1e(self.k)
        w = np.exp(2.0 * (x - self.k))
        return x, b, w

    def log_shape(self, r):
        """log phi(r)."""
        x, b, w = self._parts(r)
        return -x + np.log(k0e(x) + b * i0e(x) * w)

    def log_slope(self, r):
        """phi'(r)/phi(r)."""
        x, b, w = self._parts(r)
        return self.k * (-k1e(x) + b * i1e(x) * w) / (k0e(x) + b * i0e(x) * w)

    def evaluate(self, r, log_offset: float, r_start: float):
        """Tail values given log(u(r_start) - u_c)."""
        return self.plateau + np.exp(log_offset + self.log_shape(r) - self.log_shape(r_start))


@dataclass(frozen=True, eq=False)
class Shot:
    """Outcome of one inward integration.

    ``defect`` is u'(r_stop) <= 0 when the trajectory reached u = 1 and
    1 - max(u) > 0 when it turned back, blew off or ran into r_min.
    """

    defect: float
    outcome: str
    r_stop: float
    u_stop: float
    du_stop: float
    u_max: float
    r_start: float
    radii: np.ndarray
    values: np.ndarray
    solution: object = field(repr=False, default=None)

    @property
    def hit(self) -> bool:
        return self.outcome == "hit"

    def __call__(self, r):
        return self.solution(r)[0]


def _integrate(eta: float, epsilon: float, r_start: float, u0: float, du0: float, r_min: float) -> Shot:
    eps2 = epsilon * epsilon

    def rhs(r, y):
        u, du = y
        return [du, -du / r + (2.0 * u**3 - 2.0 * u - eta) / eps2]

    def jac(r, y):
        return [[0.0, 1.0], [(6.0 * y[0] ** 2 - 2.0) / eps2, -1.0 / r]]

    def reach_one(r, y):
        return y[0] - 1.0
    reach_one.terminal = True
    reach_one.direction = 1

    # offset from zero so a trajectory that starts (or stays) flat is not a turn
    def turn_back(r, y):
        return y[1] - TURN_SLOPE
    turn_back.terminal = True
    turn_back.direction = 1

    def blow_off(r, y):
        return y[0] - BLOW_OFF
    blow_off.terminal = True
    blow_off.direction = -1

    try:
        sol = solve_ivp(
            rhs, (r_start, r_min), [u0, du0], method="Radau", jac=jac,
            events=(reach_one, turn_back, blow_off), dense_output=True, rtol=RTOL, atol=ATOL,
        )
    except (ValueError, ArithmeticError) as exc:
        raise NumericalError(f"shooting integration failed for eta={eta}: {exc}") from exc
    if sol.status < 0:
        raise NumericalError(f"shooting integration failed for eta={eta}: {sol.message}")

    radii, values = sol.t, sol.y[0]
    u_max = float(np.max(values))
    if sol.status == 1 and sol.t_events[0].size:
        r_stop, (u_stop, du_stop) = float(sol.t_events[0][0]), sol.y_events[0][0]
        return Shot(float(du_stop), "hit", r_stop, 1.0, float(du_stop), 1.0, r_start, radii, values, sol.sol)
    outcome = "turn" if sol.status == 1 and sol.t_events[1].size else "blow-off" if sol.status == 1 else "floor"
    r_stop = float(sol.t[-1])
    return Shot(1.0 - u_max, outcome, r_stop, float(sol.y[0, -1]), float(sol.y[1, -1]), u_max, r_start, radii, values, sol.sol)


def shoot(eta: float, u_at_1: float, epsilon: float, r_min: float = DEFAULT_R_MIN) -> Shot:
    """Integrate from r = 1 with u(1) = u_at_1, u'(1) = 0 toward the origin."""
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    return _integrate(eta, epsilon, 1.0, float(u_at_1), 0.0, r_min)


def shoot_from_tail(
    eta: float, log_offset: float, epsilon: float, r_start: float, r_min: float = DEFAULT_R_MIN,
    tail: Optional[OuterTail] = None,
) -> Shot:
    """Start at r_start on the linearised outer tail with u(r_start) - u_c = exp(log_offset)."""
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    tail = tail or OuterTail.for_eta(eta, epsilon)
    offset = math.exp(log_offset)
    slope = 0.0 if r_start >= 1.0 else offset * float(tail.log_slope(r_start))
    return _integrate(eta, epsilon, r_start, tail.plateau + offset, slope, r_min)


@dataclass(frozen=True, eq=False)
class StationarySolution:
    eta: float
    r_star: float
    r0: float
    radii: np.ndarray
    values: np.ndarray
    epsilon: float
    r0_target: float
    plateau: float
    u_at_1: float
    slope_at_r_star: float
    start_radius: float
    log_offset: float
    shots: int

    @property
    def profile(self) -> tuple[np.ndarray, np.ndarray]:
        return self.radii, self.values

    @property
    def sigma(self) -> float:
        return (self.r0 - self.r_star) / self.epsilon

    @property
    def kappa(self) -> float:
        return 1.0 / self.r0_target

    def interpolant(self) -> CubicSpline:
        return CubicSpline(self.radii, self.values)

    def __call__(self, r):
        """Profile at r, extended by u = 1 inside the free boundary."""
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.r_star, 1.0, self.interpolant()(np.clip(r, self.r_star, 1.0)))
        return float(out) if out.ndim == 0 else out

    def profile_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"r": self.radii, "u": self.values})

    def summary(self) -> dict:
        bundle = asymptotic_bundle(self.epsilon, self.kappa)
        return {
            "epsilon": self.epsilon,
            "eta": self.eta,
            "r_star": self.r_star,
            "r0": self.r0,
            "sigma": self.sigma,
            "eta_asym": bundle.eta,
            "sigma_asym": bundle.sigma,
        }


class _InnerLoop:
    """Root-solve the start amplitude for one eta, remembering the last bracket.

    Small start offsets put the interface too far in and the trajectory hits
    u = 1 with negative slope (defect < 0); larger ones turn back below 1
    (defect > 0). The free boundary sits at the hit-to-turn transition.
    """

    def __init__(self, epsilon: float, r_start: float, r0_target: float, eta_target: float, r_min: float):
        self.epsilon = epsilon
        self.r_start = r_start
        self.r0_target = r0_target
        self.eta_target = eta_target
        self.r_min = r_min
        self.bracket: Optional[tuple[float, float]] = None
        self.shots = 0

    def _defect(self, eta, tail, log_offset):
        self.shots += 1
        return shoot_from_tail(eta, log_offset, self.epsilon, self.r_start, self.r_min, tail).defect

    def guess(self, eta: float, tail: OuterTail) -> float:
        """log(u(r_start) - u_c) of a tanh front whose zero sits where eta predicts it."""
        r0_predicted = self.r0_target * self.eta_target / eta
        return math.log(2.0) - tail.k * (self.r_start - r0_predicted)

    def _scan(self, eta, tail) -> tuple[float, float]:
        centre = self.guess(eta, tail)
        grid = centre + np.linspace(*SCAN_SPAN, SCAN_POINTS)
        grid = grid[grid <= math.log(MAX_START_OFFSET)]
        defects = np.array([self._defect(eta, tail, g) for g in grid])
        flips = np.flatnonzero((defects[:-1] <= 0) & (defects[1:] > 0))
        if flips.size == 0:
            raise NoSolution("inner", f"no sign change of the free-boundary defect for eta={eta:.10g}")
        i = int(flips[np.argmin(np.abs(grid[flips] - centre))])
        return float(grid[i]), float(grid[i + 1])

    def solve(self, eta: float) -> tuple[float, Shot, OuterTail]:
        tail = OuterTail.for_eta(eta, self.epsilon)
        bracket = None
        if self.bracket is not None:
            lo, hi = self.bracket
            if self._defect(eta, tail, lo) <= 0 < self._defect(eta, tail, hi):
                bracket = self.bracket
        if bracket is None:
            bracket = self._scan(eta, tail)
        log_offset = brentq(lambda g: self._defect(eta, tail, g), *bracket, xtol=1e-12, rtol=4 * np.finfo(float).eps)
        # widen slightly so the next eta can usually reuse it
        self.bracket = (log_offset - 0.25, log_offset + 0.25)
        # settle on the turning side: there u'(r*) = 0 exactly and 1 - u(r*) is at roundoff
        for step in SETTLE_STEPS:
            shot = shoot_from_tail(eta, log_offset + step, self.epsilon, self.r_start, self.r_min, tail)
            self.shots += 1
            if shot.outcome == "turn" and shot.defect < FREE_BOUNDARY_TOLERANCE:
                return log_offset + step, shot, tail
        raise NoSolution("inner", f"free-boundary defect did not settle for eta={eta:.10g}")


def solve_stationary(
    r0_target: float,
    epsilon: float,
    r_min: float = DEFAULT_R_MIN,
    eta_bracket: Optional[tuple[float, float]] = None,
) -> StationarySolution:
    """Shoot for the stationary state whose interface sits at r0_target."""
    if not 0 < r0_target < 1:
        raise InvalidArgument(f"r0 must lie in (0, 1), got {r0_target}")
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    if epsilon * math.log(1.0 / epsilon) >= r0_target / 2:
        raise InvalidArgument(f"epsilon={epsilon} is too large for layers to fit inside r0={r0_target}")

    bundle = asymptotic_bundle(epsilon, 1.0 / r0_target)
    r_start = min(1.0, r0_target + START_OFFSET * epsilon)
    inner = _InnerLoop(epsilon, r_start, r0_target, bundle.eta, r_min)
    evaluations: dict[float, tuple[float, Shot, OuterTail]] = {}

    def at_target(eta: float) -> float:
        if eta not in evaluations:
            evaluations[eta] = inner.solve(eta)
        return _target_value(evaluations[eta], r0_target, r_start)

    if eta_bracket is None:
        # eta scales like 1/r0; keep the interface of either end at least a few widths inside r_start
        half_width = min(ETA_BRACKET_FRACTION, 0.5 * (r_start - r0_target) / r0_target)
        eta_bracket = ((1.0 - half_width) * bundle.eta, (1.0 + half_width) * bundle.eta)
    lo, hi = eta_bracket
    f_lo, f_hi = at_target(lo), at_target(hi)
    if not f_lo > 0 > f_hi:
        raise NoSolution("outer", f"u(r0) does not change sign on eta in [{lo:.6g}, {hi:.6g}] ({f_lo:.3g}, {f_hi:.3g})")
    eta = brentq(at_target, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)

    etas = sorted(evaluations)
    trend = np.array([at_target(e) for e in etas])
    if np.any(np.diff(trend) > MONOTONE_SLACK):
        raise NoSolution("outer", f"u(r0) is not monotone in eta over {len(etas)} evaluations")

    at_target(eta)
    log_offset, shot, tail = evaluations[eta]
    solution = _assemble(eta, epsilon, r0_target, r_start, log_offset, shot, tail, inner.shots)
    logger.info(
        "Stationary state eps=%g: eta=%.10g r*=%.8f r0=%.10f (%d shots)",
        epsilon, eta, solution.r_star, solution.r0, inner.shots,
    )
    return solution


def _target_value(result, r0_target, r_start) -> float:
    log_offset, shot, tail = result
    if r0_target <= shot.r_stop:
        return 1.0
    if r0_target >= r_start:
        return float(tail.evaluate(r0_target, log_offset, r_start))
    return float(shot(r0_target))


def _assemble(eta, epsilon, r0_target, r_start, log_offset, shot: Shot, tail: OuterTail, shots: int) -> StationarySolution:
    r_star = shot.r_stop
    dense = np.linspace(r_star, 1.0, DENSE_POINTS)
    radii = np.unique(np.concatenate([dense, shot.radii]))
    inside = radii <= r_start
    values = np.empty_like(radii)
    values[inside] = shot(radii[inside])
    values[~inside] = tail.evaluate(radii[~inside], log_offset, r_start)
    values[0] = shot.u_stop

    def u(r):
        return shot(r) if r <= r_start else float(tail.evaluate(r, log_offset, r_start))

    upper = min(r_start, 1.0)
    if u(upper) >= 0:
        raise NoSolution("outer", "profile has no zero between the free boundary and the start radius")
    r0 = brentq(u, r_star, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return StationarySolution(
        eta=float(eta),
        r_star=float(r_star),
        r0=float(r0),
        radii=radii,
        values=values,
        epsilon=float(epsilon),
        r0_target=float(r0_target),
        plateau=float(tail.plateau),
        u_at_1=float(tail.evaluate(1.0, log_offset, r_start)),
        slope_at_r_star=float(shot.du_stop),
        start_radius=float(r_start),
        log_offset=float(log_offset),
        shots=shots,
    )


def stationary_sweep_row(epsilon: float, r0_target: float) -> dict:
    """One row of the sigma/eta comparison across interface widths."""
    sol = solve_stationary(r0_target, epsilon)
    s = sol.summary()
    return {
        "epsilon": epsilon,
        "sigma_num": s["sigma"],
        "sigma_asym": s["sigma_asym"],
        "eta_num": s["eta"],
        "eta_asym": s["eta_asym"],
    }


def eta_convergence_order(frame: pd.DataFrame) -> float:
    """Least-squares order of |eta_num - eta_asym| in epsilon."""
    defect = np.abs(frame["eta_num"] - frame["eta_asym"]).to_numpy()
    slope, _ = np.polyfit(np.log(frame["epsilon"].to_numpy()), np.log(defect), 1)
    return float(slope)
