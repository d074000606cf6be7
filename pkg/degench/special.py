"""Dilogarithm on the non-positive real axis."""
from __future__ import annotations

import math

import numpy as np

from degench.errors import UnsupportedDomain

# y^k / k^2 with y <= 1/2 is below 1e-21 after this many terms
_SERIES_TERMS = 60
_K = np.arange(1, _SERIES_TERMS + 1, dtype=float)


def _li2_small(y: np.ndarray) -> np.ndarray:
    """Power series sum y^k / k^2 for 0 <= y <= 1/2, summed smallest term first."""
    powers = y[..., None] ** _K
    return np.sum((powers / _K**2)[..., ::-1], axis=-1)


def _li2_unit(x: np.ndarray) -> np.ndarray:
    # Landen: Li2(x) = -Li2(x/(x-1)) - ln^2(1-x)/2, with x/(x-1) in [0, 1/2]
    y = x / (x - 1.0)
    return -_li2_small(y) - 0.5 * np.log1p(-x) ** 2


def dilog(x):
    """Li2(x) = -integral_0^x ln(1-t)/t dt for x <= 0.

    Arguments in [-1, 0] use the Landen transform; below -1 the inversion
    Li2(x) = -pi^2/6 - ln^2(-x)/2 - Li2(1/x) maps back into [-1, 0).
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr > 0) or np.any(np.isnan(arr)):
        raise UnsupportedDomain(f"dilog is implemented for x <= 0 only, got {x}")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)

    near = flat >= -1.0
    out[near] = _li2_unit(flat[near])

    far = ~near
    if far.any():
        xf = flat[far]
        inv = np.where(np.isinf(xf), 0.0, 1.0 / np.where(np.isinf(xf), 1.0, xf))
        out[far] = -math.pi**2 / 6.0 - 0.5 * np.log(-xf) ** 2 - _li2_unit(inv)

    out = out.reshape(np.shape(arr))
    return float(out) if out.ndim == 0 else out
