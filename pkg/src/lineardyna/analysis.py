"""Closed-form oracles for linear Dyna planning and the benchmark loss measures.

These are dense linear-algebra routines meant for small and medium ``n``
(tests, Boyan chain). The Mountain Car TD loss never forms ``F`` and works
from sparse design matrices instead.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .envs import boyan_true_value
from .errors import IllPosedPlanningError, SingularSystemError
from .features import BOYAN_N_STATES, SparseVec, boyan_feature_matrix
from .model import COND_LIMIT, LinearModel, TransitionDataset

__all__ = [
    "numerical_radius",
    "fixed_point",
    "fixed_point_dense",
    "lstd_solve",
    "rg_objective",
    "td_fixed_loss",
    "TDFixedLoss",
    "rmse_vs_true",
    "boyan_rmse_floor",
    "planning_rate_matrix",
    "td_planning_stable",
]

DENSE_LIMIT = 2000


def numerical_radius(F) -> float:
    """``max x^T F x`` over real unit vectors, i.e. the top eigenvalue of ``(F + F^T)/2``."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {F.shape}")
    if not np.all(np.isfinite(F)):
        raise ValueError("matrix has non-finite entries")
    return float(np.linalg.eigvalsh(0.5 * (F + F.T))[-1])


def fixed_point_dense(F, b, gamma: float) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    b = np.asarray(b, dtype=float)
    G = np.eye(len(b)) - gamma * F.T
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllPosedPlanningError(f"I - gamma F^T is singular (condition number {cond:.3g})")
    theta = np.linalg.solve(G, b)
    res = np.linalg.norm(G @ theta - b)
    if res > 1e-10 * max(np.linalg.norm(b), np.linalg.norm(G) * np.linalg.norm(theta), 1e-300):
        raise IllPosedPlanningError(f"fixed-point solve left residual {res:.3g}")
    return theta


def fixed_point(m: LinearModel, gamma: float) -> np.ndarray:
    """Solve ``(I - gamma F^T) theta = b``, the unique stationary point of planning."""
    if m.n <= DENSE_LIMIT:
        F, b = m.to_dense()
        return fixed_point_dense(F, b, gamma)
    G = (sp.identity(m.n, format="csc") - gamma * m.to_sparse().T).tocsc()
    b = np.array(m.b)
    try:
        theta = spla.splu(G).solve(b)
    except RuntimeError as exc:
        raise IllPosedPlanningError(str(exc)) from exc
    if not np.all(np.isfinite(theta)):
        raise IllPosedPlanningError("sparse fixed-point solve produced non-finite values")
    return theta


def _lstd_system(data: TransitionDataset, gamma: float):
    C, D, rbar = data.moments()
    return C - gamma * D, rbar


def lstd_solve(data: TransitionDataset, gamma: float) -> np.ndarray:
    """Parameters zeroing the summed TD(0) update over ``data``: ``A theta = rbar``."""
    A, rbar = _lstd_system(data, gamma)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystemError(f"LSTD matrix is singular (condition number {cond:.3g})")
    return np.linalg.solve(A, rbar)


def rg_objective(m: LinearModel, theta, samples, gamma: float) -> float:
    """Mean of ``0.5 * (b.phi + gamma theta.F phi - theta.phi)**2`` over ``samples``."""
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    theta = np.asarray(theta, dtype=float)
    if len(theta) != m.n:
        raise ValueError("theta dimension does not match model")
    total = 0.0
    for phi in samples:
        nxt, r = m.predict(phi)
        d = r + gamma * _sdot(theta, nxt) - _sdot(theta, phi)
        total += 0.5 * d * d
    return total / len(samples)


def _sdot(theta, v: SparseVec) -> float:
    return float(sum(theta[i] * x for i, x in v.items()))


class TDFixedLoss:
    """``||A theta - rbar||_2`` for a frozen evaluation dataset.

    ``method="matrix"`` precomputes the dense LSTD statistics; ``"replay"``
    keeps sparse design matrices and sums the per-transition TD(0) updates
    that would have been applied at ``theta`` without applying them. The
    default picks the matrix form only for small ``n``.
    """

    def __init__(self, data: TransitionDataset, gamma: float, method: str = "auto"):
        if len(data) == 0:
            raise ValueError("empty evaluation dataset")
        if method == "auto":
            method = "matrix" if data.dim <= DENSE_LIMIT else "replay"
        if method not in ("matrix", "replay"):
            raise ValueError(f"unknown method {method!r}")
        self.method = method
        self.gamma = gamma
        self.dim = data.dim
        if method == "matrix":
            self._A, self._rbar = _lstd_system(data, gamma)
        else:
            Phi, r, Phi2 = data.design()
            self._Phi = Phi
            self._PhiT = Phi.T.tocsr()
            self._M = (gamma * Phi2 - Phi).tocsr()
            self._r = r

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        if self.method == "matrix":
            return float(np.linalg.norm(self._A @ theta - self._rbar))
        delta = self._r + self._M @ theta
        return float(np.linalg.norm(self._PhiT @ delta))


def td_fixed_loss(data: TransitionDataset, theta, gamma: float, method: str = "auto") -> float:
    return TDFixedLoss(data, gamma, method)(theta)


_BOYAN_PHI = boyan_feature_matrix()
_BOYAN_V = np.array([boyan_true_value(s) for s in range(BOYAN_N_STATES + 1)])


def rmse_vs_true(theta) -> float:
    """RMSE of ``theta . phi(s)`` against the exact Boyan values over states 0..98."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (_BOYAN_PHI.shape[1],):
        raise ValueError(f"Boyan theta must have length {_BOYAN_PHI.shape[1]}")
    err = _BOYAN_PHI @ theta - _BOYAN_V
    return float(np.sqrt(np.mean(err * err)))


def boyan_rmse_floor() -> tuple[float, np.ndarray]:
    """Smallest achievable RMSE with the Boyan features, and the projection attaining it."""
    theta, *_ = np.linalg.lstsq(_BOYAN_PHI, _BOYAN_V, rcond=None)
    return rmse_vs_true(theta), theta


def planning_rate_matrix(F, gamma: float, mu=None) -> np.ndarray:
    """Expected unit-basis TD(0) planning drift: ``E[dtheta] = alpha (D_mu b - M theta)``; returns ``M``.

    ``M = D_mu (I - gamma F^T)`` with ``D_mu`` the diagonal of sampling
    probabilities. Small-step planning is stable iff every eigenvalue of
    ``M`` has positive real part.
    """
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    w = np.full(n, 1.0 / n) if mu is None else np.asarray(mu, dtype=float) / np.sum(mu)
    return np.diag(w) @ (np.eye(n) - gamma * F.T)


def td_planning_stable(F, gamma: float, mu=None) -> bool:
    return bool(np.all(np.linalg.eigvals(planning_rate_matrix(F, gamma, mu)).real > 0))
