"""Closed-form matched-asymptotics quantities for the radial stationary state
and the sharp-interface relaxation rates.

Inner variables: rho = (r - r0)/eps around the interface, z = rho + sigma
near the free boundary, y in the layer next to the u = -1 phase.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from types import SimpleNamespace
from typing import Optional, Sequence

import mpmath
import numpy as np
import pandas as pd

from degench.errors import InvalidArgument
from degench.mobility import MobilityKind
from degench.special import dilog

logger = logging.getLogger(__name__)

ETA1_PER_KAPPA = Fraction(2, 3)
ETA2_PER_KAPPA2 = Fraction(1, 36)
SIGMA1_PER_KAPPA = Fraction(3, 16)
U1_OUTER_PER_KAPPA = Fraction(1, 6)
U2_OUTER_PER_KAPPA2 = Fraction(7, 144)
MOBILITY_SLOPE_AT_MINUS_ONE = 2

# beyond this |rho| the closed forms lose digits to cancelling exponentials
# and are evaluated in extended precision
FAR_FIELD_RHO = 8.0


def _mp_li2(x):
    if x < -1:
        return -mpmath.pi**2 / 6 - mpmath.log(-x) ** 2 / 2 - mpmath.polylog(2, 1 / x)
    return mpmath.polylog(2, x)


_NUMPY = SimpleNamespace(
    tanh=np.tanh, cosh=np.cosh, sinh=np.sinh, log=np.log, exp=np.exp, pi=np.pi, li2=dilog,
    sech=lambda x: 1.0 / np.cosh(x),
)
_MPMATH = SimpleNamespace(
    tanh=mpmath.tanh, cosh=mpmath.cosh, sinh=mpmath.sinh, log=mpmath.log, exp=mpmath.exp,
    pi=mpmath.pi, li2=_mp_li2, sech=mpmath.sech,
)


def _u1_terms(rho, kappa, eta1, xp):
    s2 = xp.sech(rho) ** 2
    odd = 3 * rho / 8 + xp.sinh(2 * rho) / 4 + xp.sinh(4 * rho) / 32
    return (
        -(eta1 + 2 * kappa) * s2 / 16
        + (3 * eta1 - 2 * kappa) * s2 * odd / 3
        + (2 * kappa - eta1) / 8
        + (2 * kappa - 3 * eta1) * (2 * xp.cosh(2 * rho) - 5 * s2) / 48
    )


def _u2_terms(rho, kappa, eta2, xp):
    k2 = kappa**2
    s2 = xp.sech(rho) ** 2
    logcosh = xp.log(xp.cosh(rho))
    odd = 3 * rho / 8 + xp.sinh(2 * rho) / 4 + xp.sinh(4 * rho) / 32
    return (
        -eta2 / 8
        - rho * k2 / 4
        - xp.cosh(2 * rho) * (eta2 + 2 * rho * k2 / 3) / 8
        + s2 * (5 * eta2 + 23 * rho * k2 / 6 - 2 * rho**2 * k2) / 16
        + rho * k2 * (rho - xp.log(2)) * s2 / 4
        # dilogarithm of -e^{-2 rho}; the -e^{2 rho} form does not solve the second-order equation
        + k2 * s2 * xp.li2(-xp.exp(-2 * rho)) / 8
        - k2 * xp.sinh(2 * rho) * (1 - 24 * logcosh) / 288
        - k2 * xp.tanh(rho) * (1 - 24 * logcosh - 8 * s2 / 3) / 96
        + (xp.pi**2 * k2 / 6 - eta2) * s2 / 16
        + (k2 * (1 + 24 * xp.log(2)) / 36 + eta2) * s2 * odd
    )


def _evaluate(terms, rho, *params):
    """Evaluate a term builder in double precision near the interface and in
    mpmath beyond FAR_FIELD_RHO, preserving scalar/array shape."""
    arr = np.asarray(rho, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    near = np.abs(flat) <= FAR_FIELD_RHO
    if near.any():
        out[near] = terms(flat[near], *params, _NUMPY)
    for i in np.flatnonzero(~near):
        value = flat[i]
        with mpmath.workdps(int(30 + 2 * abs(value) / math.log(10))):
            mp_params = [mpmath.mpf(p) for p in params]
            out[i] = float(terms(mpmath.mpf(value), *mp_params, _MPMATH))
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def U0(rho):
    """Leading-order interface profile -tanh(rho)."""
    out = -np.tanh(np.asarray(rho, dtype=float))
    return float(out) if out.ndim == 0 else out


def U1(rho, kappa: float, eta1: Optional[float] = None):
    """First-order interface correction, bounded as rho -> +inf.

    ``eta1`` defaults to the matched value 2 kappa/3, for which the profile
    reduces to (kappa/6) tanh^2(rho).
    """
    eta1 = float(ETA1_PER_KAPPA * Fraction(kappa)) if eta1 is None else float(eta1)
    return _evaluate(_u1_terms, rho, float(kappa), eta1)


def U2(rho, kappa: float, eta2: Optional[float] = None):
    """Second-order interface correction with U2(0) = 0, bounded as rho -> +inf."""
    eta2 = float(ETA2_PER_KAPPA2 * Fraction(kappa) ** 2) if eta2 is None else float(eta2)
    return _evaluate(_u2_terms, rho, float(kappa), eta2)


def Ubar1(z, kappa: float, eta1: Optional[float] = None):
    """First-order profile next to the free boundary."""
    eta1 = float(ETA1_PER_KAPPA * Fraction(kappa)) if eta1 is None else float(eta1)
    out = eta1 / 4.0 * (1.0 - np.cosh(2.0 * np.asarray(z, dtype=float)))
    return float(out) if out.ndim == 0 else out


def Ubar2(z, kappa: float, eta2: Optional[float] = None):
    """Second-order profile next to the free boundary."""
    eta2 = float(ETA2_PER_KAPPA2 * Fraction(kappa) ** 2) if eta2 is None else float(eta2)
    z = np.asarray(z, dtype=float)
    a2 = (kappa / 12.0) ** 2
    out = (
        a2 * (np.cosh(4 * z) + 3 * np.exp(-2 * z) * (1 + 4 * z) - 9)
        + a2 * np.exp(2 * z)
        + 4 * a2 * np.exp(-2 * z)
        + eta2 / 4 * (1 - np.cosh(2 * z))
    )
    return float(out) if out.ndim == 0 else out


def growing_term_coefficient(kappa, eta1=None) -> Fraction:
    """Coefficient (2 kappa - 3 eta1)/24 of the e^{-2z} term of the first-order
    interface profile seen from the free boundary; zero at the matched eta1."""
    k = Fraction(kappa)
    e1 = ETA1_PER_KAPPA * k if eta1 is None else Fraction(eta1)
    return (2 * k - 3 * e1) / 24


def hat_layer_profiles(y, kappa: float, flux_at_interface: float, mobility_slope: float = MOBILITY_SLOPE_AT_MINUS_ONE):
    """First-order profile and second-order chemical potential in the layer
    next to the u = -1 phase.

    The chemical potential carries the constant flux M'(-1) U1 d_y eta2 = flux/2.
    """
    if not kappa > 0:
        raise InvalidArgument(f"kappa must be positive, got {kappa}")
    y = np.asarray(y, dtype=float)
    u_hat1 = 2.0 * np.exp(-2.0 * y) + kappa / 6.0
    prefactor = 3.0 * flux_at_interface / (2.0 * kappa * mobility_slope)
    eta_hat2 = prefactor * np.log1p(kappa / 12.0 * np.exp(2.0 * y)) + kappa**2 / 36.0
    if y.ndim == 0:
        return float(u_hat1), float(eta_hat2)
    return u_hat1, eta_hat2


@dataclass(frozen=True)
class InnerProfiles:
    """Inner-layer evaluators with (kappa, eta1, eta2) bound."""

    kappa: float
    eta1: float
    eta2: float

    def U0(self, rho):
        return U0(rho)

    def U1(self, rho):
        return U1(rho, self.kappa, self.eta1)

    def U2(self, rho):
        return U2(rho, self.kappa, self.eta2)

    def Ubar1(self, z):
        return Ubar1(z, self.kappa, self.eta1)

    def Ubar2(self, z):
        return Ubar2(z, self.kappa, self.eta2)

    def Uhat1(self, y):
        return hat_layer_profiles(y, self.kappa, 0.0)[0]

    def etahat2(self, y, flux: float):
        return hat_layer_profiles(y, self.kappa, flux)[1]


@dataclass(frozen=True)
class AsymptoticBundle:
    kappa: float
    epsilon: float
    eta1: float
    eta2: float
    sigma0: float
    sigma1: float
    u1_outer: float
    u2_outer: float

    @property
    def eta(self) -> float:
        """Two-term chemical potential eps eta1 + eps^2 eta2."""
        return self.epsilon * self.eta1 + self.epsilon**2 * self.eta2

    @property
    def sigma(self) -> float:
        return self.sigma0 + self.epsilon * self.sigma1

    @property
    def r0(self) -> float:
        return 1.0 / self.kappa

    @property
    def r_star(self) -> float:
        return self.r0 - self.epsilon * self.sigma

    @property
    def outer_plateau(self) -> float:
        return -1.0 + self.epsilon * self.u1_outer + self.epsilon**2 * self.u2_outer

    @property
    def profiles(self) -> InnerProfiles:
        return InnerProfiles(self.kappa, self.eta1, self.eta2)

    def to_dict(self) -> dict:
        data = asdict(self)
        data.update(eta=self.eta, sigma=self.sigma, r_star=self.r_star, outer_plateau=self.outer_plateau)
        return data

    def profile_tables(self, n: int = 201, rho_range=(-6.0, 6.0), z_range=(0.0, 3.0)) -> dict[str, pd.DataFrame]:
        rho = np.linspace(*rho_range, n)
        z = np.linspace(*z_range, n)
        p = self.profiles
        interface = pd.DataFrame({"rho": rho, "U0": p.U0(rho), "U1": p.U1(rho), "U2": p.U2(rho)})
        free_boundary = pd.DataFrame({"z": z, "Ubar1": p.Ubar1(z), "Ubar2": p.Ubar2(z)})
        return {"interface": interface, "free_boundary": free_boundary}


def asymptotic_bundle(epsilon: float, kappa: float) -> AsymptoticBundle:
    if not kappa > 0:
        raise InvalidArgument(f"kappa must be positive (sigma0 diverges at kappa=0), got {kappa}")
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    k = Fraction(kappa)
    return AsymptoticBundle(
        kappa=float(kappa),
        epsilon=float(epsilon),
        eta1=float(ETA1_PER_KAPPA * k),
        eta2=float(ETA2_PER_KAPPA2 * k**2),
        sigma0=0.5 * math.log(24.0 / (epsilon * kappa)),
        sigma1=float(SIGMA1_PER_KAPPA * k),
        u1_outer=float(U1_OUTER_PER_KAPPA * k),
        u2_outer=float(U2_OUTER_PER_KAPPA2 * k**2),
    )


def eta_asym(epsilon: float, kappa: float) -> float:
    return asymptotic_bundle(epsilon, kappa).eta


def sigma_asym(epsilon: float, kappa: float) -> float:
    return asymptotic_bundle(epsilon, kappa).sigma


def exponential_matching_check(
    epsilon: float,
    kappa: float,
    z_window: tuple[float, float] = (0.5, 1.5),
    n_samples: int = 201,
) -> float:
    """Max |interface composite - free-boundary composite| over the z window.

    The interface composite U0 + eps U1 + eps^2 U2 is taken at rho = z - sigma
    with the two-term sigma; the free-boundary composite is 1 + eps Ubar1 + eps^2 Ubar2.
    """
    if not 0 < epsilon <= 0.1:
        raise InvalidArgument(f"epsilon must lie in (0, 0.1], got {epsilon}")
    bundle = asymptotic_bundle(epsilon, kappa)
    z = np.linspace(z_window[0], z_window[1], n_samples)
    rho = z - bundle.sigma
    p = bundle.profiles
    interface = p.U0(rho) + epsilon * p.U1(rho) + epsilon**2 * p.U2(rho)
    free_boundary = 1.0 + epsilon * p.Ubar1(z) + epsilon**2 * p.Ubar2(z)
    mismatch = float(np.max(np.abs(interface - free_boundary)))
    logger.debug("Matching mismatch eps=%g kappa=%g: %.3e", epsilon, kappa, mismatch)
    return mismatch


def _second_difference(profile, x, h):
    u = [profile(x + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (u[0] - 8 * u[1] + 8 * u[3] - u[4]) / (12 * h)
    d2 = (-u[0] + 16 * u[1] - 30 * u[2] + 16 * u[3] - u[4]) / (12 * h * h)
    return u[2], d1, d2


def profile_residuals(kappa: float, rho=None, z=None, step: float = 2e-3) -> dict[str, float]:
    """Max residual of each inner equation, with derivatives from 5-point differences.

        U1'' - f''(U0) U1 = -eta1 + kappa sech^2
        U2'' - f''(U0) U2 = -eta2 - 6 tanh U1^2 - kappa U1' - kappa^2 rho sech^2
        Ubar1'' - 4 Ubar1 = -eta1
        Ubar2'' - 4 Ubar2 = -eta2 + 6 Ubar1^2 - kappa Ubar1'
    """
    rho = np.linspace(-3.0, 3.0, 20) if rho is None else np.asarray(rho, dtype=float)
    z = np.linspace(0.1, 2.0, 20) if z is None else np.asarray(z, dtype=float)
    b = asymptotic_bundle(1.0, kappa)
    worst = {"U1": 0.0, "U2": 0.0, "Ubar1": 0.0, "Ubar2": 0.0}

    for x in rho:
        t, s = math.tanh(x), 1.0 / math.cosh(x) ** 2
        fpp = 6 * t * t - 2
        u1, du1, d2u1 = _second_difference(lambda q: U1(q, kappa), x, step)
        u2, _, d2u2 = _second_difference(lambda q: U2(q, kappa), x, step)
        worst["U1"] = max(worst["U1"], abs(d2u1 - fpp * u1 + b.eta1 - kappa * s))
        worst["U2"] = max(
            worst["U2"],
            abs(d2u2 - fpp * u2 + b.eta2 + 6 * t * u1**2 + kappa * du1 + kappa**2 * x * s),
        )
    for x in z:
        v1, dv1, d2v1 = _second_difference(lambda q: Ubar1(q, kappa), x, step)
        v2, _, d2v2 = _second_difference(lambda q: Ubar2(q, kappa), x, step)
        worst["Ubar1"] = max(worst["Ubar1"], abs(d2v1 - 4 * v1 + b.eta1))
        worst["Ubar2"] = max(worst["Ubar2"], abs(d2v2 - 4 * v2 + b.eta2 - 6 * v1**2 + kappa * dv1))
    return worst


def matching_order(
    epsilons: Sequence[float], kappa: float, log_power: int = 2, **kwargs
) -> tuple[float, list[float]]:
    """Least-squares order of exponential_matching_check in epsilon.

    At rho ~ -sigma0 the rho-polynomial terms of U2 leave an
    eps^3 sigma0^2 remainder, so mismatch / sigma0^log_power is fitted.
    ``log_power=0`` gives the raw order.
    """
    mismatches = [exponential_matching_check(e, kappa, **kwargs) for e in epsilons]
    logs = np.array([asymptotic_bundle(e, kappa).sigma0 for e in epsilons]) ** log_power
    slope, _ = np.polyfit(np.log(epsilons), np.log(np.asarray(mismatches) / logs), 1)
    return float(slope), mismatches


def lambda_pure(m: int, r0: float, mob) -> float:
    """Surface-diffusion decay rate -mob m^2 (m^2 - 1)/r0^4."""
    _check_mode(m, r0, minimum=0)
    return float(-Fraction(mob) * m**2 * (m**2 - 1) / Fraction(r0) ** 4)


def _bulk_term(m: int, r0: float) -> float:
    return float(Fraction(m * (m**2 - 1), 9) / Fraction(r0) ** 4)


def lambda_one_sided(m: int, r0: float) -> float:
    """Surface diffusion plus one-sided porous-medium bulk flux."""
    _check_mode(m, r0, minimum=1)
    return lambda_pure(m, r0, ETA1_PER_KAPPA) - _bulk_term(m, r0) * math.tanh(m * math.log(1.0 / r0))


def lambda_two_sided(m: int, r0: float) -> float:
    """Surface diffusion plus bulk flux on both sides of the interface."""
    _check_mode(m, r0, minimum=1)
    return lambda_pure(m, r0, ETA1_PER_KAPPA) - _bulk_term(m, r0) * (math.tanh(m * math.log(1.0 / r0)) + 1.0)


def _check_mode(m: int, r0: float, minimum: int) -> None:
    if int(m) != m or m < minimum:
        raise InvalidArgument(f"mode m must be an integer >= {minimum}, got {m}")
    if not 0 < r0 < 1:
        raise InvalidArgument(f"r0 must lie in (0, 1), got {r0}")


def sharp_velocity_coefficients(mobility: MobilityKind | str) -> tuple[Fraction, tuple[Fraction, ...]]:
    """Surface-diffusion coefficient and bulk-flux coefficients of the normal velocity."""
    kind = MobilityKind.parse(mobility)
    if kind is MobilityKind.QUADRATIC_POSITIVE_PART:
        return Fraction(2, 3), (Fraction(1, 4),)
    if kind is MobilityKind.ABSOLUTE_VALUE:
        return Fraction(2, 3), (Fraction(1, 4), Fraction(1, 4))
    return Fraction(4, 9), ()


def analytic_rates(mobility: MobilityKind | str, m: int, r0: float) -> dict[str, float]:
    """The closed-form rates that apply to a mobility."""
    surface, bulk = sharp_velocity_coefficients(mobility)
    rates = {"pure": lambda_pure(m, r0, surface)}
    if len(bulk) == 1:
        rates["one_sided"] = lambda_one_sided(m, r0)
    elif len(bulk) == 2:
        rates["two_sided"] = lambda_two_sided(m, r0)
    return rates
