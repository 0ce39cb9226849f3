import numpy as np
import pytest

from lineardyna.analysis import (
    TDFixedLoss,
    boyan_rmse_floor,
    fixed_point,
    fixed_point_dense,
    lstd_solve,
    numerical_radius,
    planning_rate_matrix,
    rg_objective,
    rmse_vs_true,
    td_fixed_loss,
    td_planning_stable,
)
from lineardyna.envs import boyan_true_value
from lineardyna.errors import IllPosedPlanningError, SingularSystemError
from lineardyna.features import SparseVec, boyan_feature_matrix, unit_basis
from lineardyna.harness.verify import random_dataset
from lineardyna.model import LinearModel, TransitionDataset, fit_least_squares
from lineardyna.planners import rg_update


def stable_model(rng, n, scale=0.8):
    F = rng.normal(size=(n, n))
    F *= scale / np.linalg.norm(F, 2)
    return LinearModel.from_dense(F, rng.normal(size=n), drop_tol=0.0)


# -- numerical radius ------------------------------------------------------------

def test_numerical_radius_examples(rng):
    for n in (1, 3, 7):
        assert numerical_radius(np.eye(n)) == pytest.approx(1.0, abs=1e-15)
    assert numerical_radius([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(0.5, abs=1e-15)
    S = rng.normal(size=(5, 5))
    S = S + S.T
    assert numerical_radius(S) == pytest.approx(np.linalg.eigvalsh(S)[-1], abs=1e-12)


def test_numerical_radius_bounds_sampled_quadratic_form(rng):
    for _ in range(10):
        F = rng.normal(size=(4, 4))
        X = rng.normal(size=(4, 20_000))
        X /= np.linalg.norm(X, axis=0)
        sampled = np.max(np.einsum("ik,ij,jk->k", X, F, X))
        assert sampled <= numerical_radius(F) + 1e-9


def test_numerical_radius_rejects_bad_input():
    with pytest.raises(ValueError):
        numerical_radius(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        numerical_radius([[np.nan]])


def test_radius_matches_symmetric_part_of_g(rng):
    # lambda_min of the symmetric part of G = I - gamma F equals 1 - gamma r(F)
    for _ in range(20):
        F = rng.normal(size=(4, 4))
        gamma = float(rng.uniform(0.1, 1.0))
        G = np.eye(4) - gamma * F
        lam = np.linalg.eigvalsh(0.5 * (G + G.T))[0]
        assert lam == pytest.approx(1 - gamma * numerical_radius(F), abs=1e-12)
        assert (lam >= 0) == (numerical_radius(F) <= 1 / gamma)


def test_small_radius_implies_stable_td_planning(rng):
    for _ in range(20):
        F = rng.normal(size=(5, 5))
        F *= 0.95 / numerical_radius(F) if numerical_radius(F) > 0 else 1.0
        assert td_planning_stable(F, 1.0)
        mu = rng.random(5) + 0.1
        assert td_planning_stable(F, 1.0, mu)
    assert planning_rate_matrix(np.zeros((2, 2)), 1.0).tolist() == [[0.5, 0.0], [0.0, 0.5]]


# -- fixed point ---------------------------------------------------------------------

def test_fixed_point_examples(rng):
    assert np.array_equal(fixed_point(LinearModel(3), 0.9), np.zeros(3))
    m = LinearModel.from_dense([[0.5]], [1.0])
    assert fixed_point(m, 0.9)[0] == pytest.approx(1 / 0.55, rel=1e-14)


def test_fixed_point_matches_neumann_series(rng):
    for _ in range(10):
        m = stable_model(rng, 6, scale=0.7)
        F, b = m.to_dense()
        gamma = 0.9
        term, total = b.copy(), b.copy()
        while np.max(np.abs(term)) > 1e-16:
            term = gamma * F.T @ term
            total += term
        assert np.max(np.abs(fixed_point(m, gamma) - total)) < 1e-10


def test_fixed_point_sparse_path_agrees_with_dense(rng):
    n = 2500  # above the dense limit
    F = np.zeros((n, n))
    rows = rng.integers(n, size=4 * n)
    cols = rng.integers(n, size=4 * n)
    F[rows, cols] = rng.uniform(0, 0.2, size=4 * n)
    m = LinearModel.from_dense(F, rng.normal(size=n), drop_tol=0.0)
    theta = fixed_point(m, 0.9)
    G = np.eye(n) - 0.9 * F.T
    assert np.linalg.norm(G @ theta - m.b) <= 1e-10 * np.linalg.norm(m.b) * 10


def test_fixed_point_ill_posed():
    with pytest.raises(IllPosedPlanningError):
        fixed_point(LinearModel.from_dense(np.eye(2), [1.0, 1.0]), 1.0)
    with pytest.raises(IllPosedPlanningError):
        fixed_point_dense([[2.0, 0.0], [0.0, 1.0]], [1.0, 0.0], 1.0)


# -- LSTD --------------------------------------------------------------------------------

def test_lstd_scalar():
    data = TransitionDataset.from_dense([[1.0]], [1.0], [[0.0]])
    assert lstd_solve(data, 0.9)[0] == pytest.approx(1.0, abs=1e-15)


def test_lstd_equals_fixed_point_of_least_squares_model(rng):
    for _ in range(100):
        data = random_dataset(rng, 4, 40)
        a = lstd_solve(data, 0.9)
        b = fixed_point(fit_least_squares(data, drop_tol=0.0), 0.9)
        assert np.max(np.abs(a - b)) <= 1e-8


def test_lstd_on_exact_model_data(rng):
    m = stable_model(rng, 5)
    F, b = m.to_dense()
    X = rng.normal(size=(30, 5))
    data = TransitionDataset.from_dense(X, X @ b, X @ F.T)
    assert np.max(np.abs(lstd_solve(data, 0.95) - fixed_point(m, 0.95))) <= 1e-8


def test_lstd_singular():
    data = TransitionDataset.from_dense([[1.0, 0.0]], [1.0], [[0.0, 0.0]])
    with pytest.raises(SingularSystemError):
        lstd_solve(data, 0.9)


# -- residual-gradient objective -------------------------------------------------------

def test_rg_objective_zero_at_fixed_point(rng):
    m = stable_model(rng, 5)
    samples = [SparseVec.from_dense(rng.normal(size=5)) for _ in range(10)]
    assert rg_objective(m, fixed_point(m, 0.9), samples, 0.9) < 1e-25
    with pytest.raises(ValueError):
        rg_objective(m, np.zeros(5), [], 0.9)


def test_rg_objective_gradient_matches_update_direction(rng):
    n, gamma = 4, 0.9
    m = stable_model(rng, n)
    samples = [SparseVec.from_dense(rng.normal(size=n)) for _ in range(8)]
    theta = rng.normal(size=n)
    direction = np.zeros(n)
    for phi in samples:
        nxt, r = m.predict(phi)
        t = theta.copy()
        rg_update(t, phi, r, nxt, gamma, 1.0)
        direction += t - theta
    direction /= len(samples)
    h = 1e-6
    grad = np.array([
        (rg_objective(m, theta + h * np.eye(n)[i], samples, gamma)
         - rg_objective(m, theta - h * np.eye(n)[i], samples, gamma)) / (2 * h)
        for i in range(n)
    ])
    assert np.max(np.abs(grad + direction)) < 1e-5


def test_rg_objective_descends_under_small_steps(rng):
    n, gamma = 5, 0.9
    m = stable_model(rng, n)
    samples = [unit_basis(i, n) for i in range(n)]
    theta = rng.normal(size=n)
    prev = rg_objective(m, theta, samples, gamma)
    for _ in range(200):
        # the step averaged over all samples is exact gradient descent on J
        step = np.zeros(n)
        for psi in samples:
            nx, rr = m.predict(psi)
            t = theta.copy()
            rg_update(t, psi, rr, nx, gamma, 0.01)
            step += t - theta
        theta = theta + step / n
        cur = rg_objective(m, theta, samples, gamma)
        assert cur <= prev + 1e-15
        prev = cur


# -- loss measures --------------------------------------------------------------------

def test_td_fixed_loss_examples(rng):
    data = random_dataset(rng, 6, 60)
    theta = lstd_solve(data, 0.9)
    assert td_fixed_loss(data, theta, 0.9) < 1e-9
    _, _, rbar = data.moments()
    assert td_fixed_loss(data, np.zeros(6), 0.9) == pytest.approx(np.linalg.norm(rbar), rel=1e-12)


def test_td_fixed_loss_matches_replay_oracle(rng):
    data = random_dataset(rng, 7, 80)
    theta = rng.normal(size=7)
    total = np.zeros(7)
    for phi, r, nxt in data:
        x, y = phi.to_dense(), nxt.to_dense()
        total += (r + 0.9 * theta @ y - theta @ x) * x
    oracle = np.linalg.norm(total)
    for method in ("matrix", "replay", "auto"):
        assert TDFixedLoss(data, 0.9, method)(theta) == pytest.approx(oracle, rel=1e-10)
    with pytest.raises(ValueError):
        TDFixedLoss(data, 0.9, "exact")


def test_rmse_examples():
    v = np.array([boyan_true_value(s) for s in range(99)])
    assert rmse_vs_true(np.zeros(25)) == pytest.approx(np.sqrt(np.mean(v ** 2)), rel=1e-14)
    floor, theta = boyan_rmse_floor()
    assert floor == pytest.approx(rmse_vs_true(theta), rel=1e-14)
    Phi = boyan_feature_matrix()
    oracle, *_ = np.linalg.lstsq(Phi, v, rcond=None)
    assert np.max(np.abs(theta - oracle)) < 1e-9
    with pytest.raises(ValueError):
        rmse_vs_true(np.zeros(24))


def test_rmse_floor_is_minimal(rng):
    floor, theta = boyan_rmse_floor()
    for _ in range(50):
        assert rmse_vs_true(theta + 1e-3 * rng.normal(size=25)) >= floor
