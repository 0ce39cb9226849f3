"""Primitive value updates shared by every planner.

``theta`` is a float64 numpy vector updated in place.
"""
from __future__ import annotations

import numpy as np

from .. import _kernels as K
from ..errors import DivergenceError
from ..features import SparseVec

THETA_LIMIT = K.THETA_LIMIT


def value(theta: np.ndarray, phi: SparseVec) -> float:
    idx, val = phi.arrays
    return float(K.sparse_dot(theta, idx, val))


def check_finite(theta: np.ndarray, touched, step=None) -> None:
    """Raise :class:`DivergenceError` if any touched coordinate left ``[-1e12, 1e12]``.

    NaN fails both comparisons, so it trips the guard as well.
    """
    for i in touched:
        v = theta[i]
        if not -THETA_LIMIT <= v <= THETA_LIMIT:
            raise DivergenceError(step, f"theta[{i}] = {v}")


def diverged(theta: np.ndarray, i: int, step) -> DivergenceError:
    return DivergenceError(step, f"theta[{i}] = {theta[i]}")


def _check(theta, phi, phi_next):
    if not isinstance(theta, np.ndarray) or theta.dtype != np.float64 or theta.ndim != 1:
        raise TypeError("theta must be a 1-d float64 numpy array")
    n = len(theta)
    if phi.dim != n or phi_next.dim != n:
        raise ValueError(f"feature dims ({phi.dim}, {phi_next.dim}) do not match theta ({n})")


def td0_update(theta: np.ndarray, phi: SparseVec, r: float, phi_next: SparseVec,
               gamma: float, alpha: float, step=None) -> float:
    """Linear TD(0): ``theta += alpha * delta * phi``. Returns the TD error ``delta``."""
    _check(theta, phi, phi_next)
    idx, val = phi.arrays
    idx2, val2 = phi_next.arrays
    delta, bad = K.td0(theta, idx, val, idx2, val2, float(r), float(gamma), float(alpha))
    if bad >= 0:
        raise diverged(theta, bad, step)
    return delta


def rg_update(theta: np.ndarray, phi: SparseVec, r: float, phi_next: SparseVec,
              gamma: float, alpha: float, step=None) -> float:
    """Residual gradient: ``theta += alpha * delta * (phi - gamma * phi_next)``."""
    _check(theta, phi, phi_next)
    idx, val = phi.arrays
    idx2, val2 = phi_next.arrays
    delta, bad = K.rg(theta, idx, val, idx2, val2, float(r), float(gamma), float(alpha))
    if bad >= 0:
        raise diverged(theta, bad, step)
    return delta
