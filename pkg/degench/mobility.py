from __future__ import annotations

from enum import Enum

import numpy as np

from degench.errors import InvalidArgument


class MobilityKind(str, Enum):
    """Degenerate mobilities M(u). Values double as CLI names."""

    QUADRATIC_POSITIVE_PART = "quad-pos"
    ABSOLUTE_VALUE = "abs"
    BIQUADRATIC_POSITIVE_PART = "biquad-pos"

    @classmethod
    def parse(cls, value: "MobilityKind | str") -> "MobilityKind":
        if isinstance(value, cls):
            return value
        aliases = {
            "quadraticpositivepart": cls.QUADRATIC_POSITIVE_PART,
            "absolutevalue": cls.ABSOLUTE_VALUE,
            "biquadraticpositivepart": cls.BIQUADRATIC_POSITIVE_PART,
        }
        key = str(value).strip().lower()
        try:
            return cls(key)
        except ValueError:
            pass
        if key.replace("_", "") in aliases:
            return aliases[key.replace("_", "")]
        raise InvalidArgument(f"unknown mobility {value!r}; expected one of {[m.value for m in cls]}")

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        one_minus = 1.0 - u * u
        if self is MobilityKind.QUADRATIC_POSITIVE_PART:
            return np.maximum(one_minus, 0.0)
        if self is MobilityKind.ABSOLUTE_VALUE:
            return np.abs(one_minus)
        return np.maximum(one_minus, 0.0) ** 2

    def derivative(self, u, side: int = -1) -> np.ndarray:
        """One-sided derivative M'(u); ``side=-1`` approaches from below, ``+1`` from above."""
        u = np.asarray(u, dtype=float)
        one_minus = 1.0 - u * u
        slope = -2.0 * u
        # sign of 1 - u^2 just to the chosen side of u
        step = np.finfo(float).eps * np.maximum(1.0, np.abs(u))
        nudged = 1.0 - (u + side * step) ** 2
        positive = np.where(one_minus != 0.0, one_minus > 0.0, nudged > 0.0)
        if self is MobilityKind.QUADRATIC_POSITIVE_PART:
            return np.where(positive, slope, 0.0)
        if self is MobilityKind.ABSOLUTE_VALUE:
            return np.where(positive, slope, -slope)
        return np.where(positive, 2.0 * one_minus * slope, 0.0)


def potential(u) -> np.ndarray:
    """Double well f(u) = (1 - u^2)^2 / 2."""
    u = np.asarray(u, dtype=float)
    return 0.5 * (1.0 - u * u) ** 2


def potential_prime(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return -2.0 * u * (1.0 - u * u)


def potential_second(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return 6.0 * u * u - 2.0
