import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lineardyna.errors import SingularSystemError
from lineardyna.features import SparseVec, unit_basis
from lineardyna.model import (
    ActionModelSet,
    FeatureSlots,
    LinearModel,
    TransitionDataset,
    column,
    dumps_model,
    fit_least_squares,
    load_model,
    loads_model,
    predict,
    row_nonzeros,
    save_model,
    update_model,
)


def sparse_random(rng, n, density=0.5):
    x = rng.normal(size=n) * (rng.random(n) < density)
    return SparseVec.from_dense(x)


def random_model(rng, n, density=0.4):
    F = rng.normal(size=(n, n)) * (rng.random((n, n)) < density)
    return LinearModel.from_dense(F, rng.normal(size=n), drop_tol=0.0), F


# -- predict / column ------------------------------------------------------------

def test_zero_model_predicts_nothing(rng):
    m = LinearModel(6)
    phi_next, r = predict(m, sparse_random(rng, 6))
    assert len(phi_next) == 0 and r == 0.0


def test_predict_matches_dense_oracle(rng):
    for _ in range(20):
        n = int(rng.integers(2, 12))
        m, F = random_model(rng, n)
        phi = sparse_random(rng, n)
        got, r = predict(m, phi)
        assert np.max(np.abs(got.to_dense() - F @ phi.to_dense())) <= 1e-12
        assert abs(r - m.b @ phi.to_dense()) <= 1e-12
        for j in range(n):
            assert column(m, j) == predict(m, unit_basis(j, n))[0]
            assert np.array_equal(column(m, j).to_dense(), F[:, j])


def test_predict_dimension_mismatch():
    with pytest.raises(ValueError):
        LinearModel(3).predict(unit_basis(0, 4))


# -- update_model -----------------------------------------------------------------

def test_update_alpha_zero_is_noop(rng):
    m, _ = random_model(rng, 5)
    before = dumps_model(m)
    update_model(m, sparse_random(rng, 5), 3.0, sparse_random(rng, 5), 0.0)
    assert dumps_model(m) == before


def test_update_single_step_by_hand():
    m = LinearModel(2)
    update_model(m, unit_basis(0, 2), 1.0, SparseVec(2, (0, 1), (0.3, 0.7)), 1.0)
    assert column(m, 0) == SparseVec(2, (0, 1), (0.3, 0.7))
    assert m.b.tolist() == [1.0, 0.0]


def test_row_nonzeros_after_rank_one_update():
    alpha = 0.25
    m = LinearModel(8)
    assert row_nonzeros(m, 5) == []
    update_model(m, unit_basis(3, 8), 0.0, SparseVec(8, (5,), (0.4,)), alpha)
    assert row_nonzeros(m, 5) == [(3, 0.4 * alpha)]
    assert m.predecessors(5) == [3]


def test_update_matches_dense_rank_one_oracle(rng):
    n = 9
    m = LinearModel(n, drop_tol=0.0)
    F, b = np.zeros((n, n)), np.zeros(n)
    for _ in range(200):
        phi, nxt = sparse_random(rng, n, 0.4), sparse_random(rng, n, 0.4)
        r, alpha = float(rng.normal()), float(rng.uniform(0, 0.3))
        x, y = phi.to_dense(), nxt.to_dense()
        F += alpha * np.outer(y - F @ x, x)
        b += alpha * (r - b @ x) * x
        m.update(phi, r, nxt, alpha)
    Fm, bm = m.to_dense()
    assert np.max(np.abs(Fm - F)) <= 1e-12 and np.max(np.abs(bm - b)) <= 1e-12


def test_update_only_touches_active_columns(rng):
    n = 6
    m, F = random_model(rng, n, density=0.8)
    phi = SparseVec(n, (1, 4), (1.0, -0.5))
    m.update(phi, 1.0, sparse_random(rng, n), 0.1)
    after, _ = m.to_dense()
    untouched = [j for j in range(n) if j not in (1, 4)]
    assert np.array_equal(after[:, untouched], F[:, untouched])


def test_pruning_stays_within_tolerance(rng):
    n, tol = 7, 1e-3
    m = LinearModel(n, drop_tol=tol)
    F = np.zeros((n, n))
    for _ in range(300):
        phi, nxt = sparse_random(rng, n, 0.4), sparse_random(rng, n, 0.4)
        x, y = phi.to_dense(), nxt.to_dense()
        Fm, _ = m.to_dense()
        # oracle applies the same step to the pruned matrix, then prunes
        F = Fm + 0.05 * np.outer(y - Fm @ x, x)
        F[np.abs(F) <= tol] = 0.0
        m.update(phi, 0.0, nxt, 0.05)
        got, _ = m.to_dense()
        assert np.max(np.abs(got - F)) <= 1e-12
    assert all(abs(v) > tol for _, _, v in m.triples())


def test_cycling_converges_to_least_squares():
    data = TransitionDataset.from_dense(
        [[1.0, 0.0, 0.5], [0.0, 1.0, 1.0], [0.5, 0.5, 0.0]],
        [1.0, -2.0, 0.5],
        [[0.0, 1.0, 0.0], [0.2, 0.0, 0.7], [1.0, 0.0, 0.0]],
    )
    target = fit_least_squares(data)
    m = LinearModel(3)
    for _ in range(10_000):
        for phi, r, nxt in data:
            m.update(phi, r, nxt, 0.05)
    (F, b), (Ft, bt) = m.to_dense(), target.to_dense()
    assert np.max(np.abs(F - Ft)) <= 1e-3 and np.max(np.abs(b - bt)) <= 1e-3


def test_update_rejects_negative_step():
    with pytest.raises(ValueError):
        LinearModel(2).update(unit_basis(0, 2), 0.0, unit_basis(1, 2), -0.1)


# -- storage consistency ----------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_row_and_column_views_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    m = LinearModel(n)
    for _ in range(int(rng.integers(1, 20))):
        m.update(sparse_random(rng, n), float(rng.normal()), sparse_random(rng, n), float(rng.uniform(0, 1)))
    by_row = {(i, j, v) for i in range(n) for j, v in m.row_nonzeros(i)}
    by_col = {(i, j, v) for j in range(n) for i, v in m.column(j).items()}
    assert by_row == by_col == set(m.triples())
    assert m.nnz() == len(by_row)
    for i, j, v in by_row:
        assert m.get(i, j) == v
    assert np.array_equal(m.to_sparse().toarray(), m.to_dense()[0])


def test_slot_map_grows_and_orders():
    s = FeatureSlots(100, capacity=2)
    s.ensure(np.array([50, 3, 77], dtype=np.int64))
    s.ensure(np.array([3, 1], dtype=np.int64))
    assert s.k == 4 and s.capacity >= 4
    assert s.features().tolist() == [3, 50, 77, 1]  # new features in a batch get slots in sorted order
    assert s.feat[s.order[: s.k]].tolist() == [1, 3, 50, 77]
    assert s.slot[77] == 2 and s.slot[1] == 3 and s.slot[0] == -1


def test_copy_is_independent(rng):
    m, _ = random_model(rng, 5)
    c = m.copy()
    c.update(unit_basis(0, 5), 1.0, unit_basis(1, 5), 0.5)
    assert dumps_model(m) != dumps_model(c)


# -- fit_least_squares --------------------------------------------------------------

def test_fit_identity_covariance(rng):
    n = 4
    nexts = [sparse_random(rng, n) for _ in range(n)]
    data = TransitionDataset(n)
    data.extend((unit_basis(k, n), float(k), nexts[k]) for k in range(n))
    m = fit_least_squares(data)
    for k in range(n):
        assert np.allclose(m.column(k).to_dense(), nexts[k].to_dense(), atol=1e-12)
        assert m.b[k] == pytest.approx(k, abs=1e-12)


def test_fit_scalar_by_hand():
    data = TransitionDataset.from_dense([[2.0]], [4.0], [[1.0]])
    m = fit_least_squares(data)
    assert m.get(0, 0) == pytest.approx(0.5, abs=1e-14)
    assert m.b[0] == pytest.approx(2.0, abs=1e-14)


def test_fit_is_locally_optimal(rng):
    n, k = 5, 50
    X, Y = rng.normal(size=(k, n)), rng.normal(size=(k, n))
    data = TransitionDataset.from_dense(X, rng.normal(size=k), Y)
    F, _ = fit_least_squares(data).to_dense()

    def loss(G):
        return float(np.sum((X @ G.T - Y) ** 2))

    base = loss(F)
    for i in range(n):
        for j in range(n):
            for eps in (1e-3, -1e-3):
                G = F.copy()
                G[i, j] += eps
                assert loss(G) >= base


def test_fit_recovers_generating_model(rng):
    n = 6
    F_true = rng.normal(size=(n, n))
    b_true = rng.normal(size=n)
    X = rng.normal(size=(40, n))
    data = TransitionDataset.from_dense(X, X @ b_true, X @ F_true.T)
    F, b = fit_least_squares(data, drop_tol=0.0).to_dense()
    assert np.max(np.abs(F - F_true)) <= 1e-8 and np.max(np.abs(b - b_true)) <= 1e-8


def test_fit_singular_covariance():
    data = TransitionDataset.from_dense([[1.0, 1.0], [2.0, 2.0]], [0.0, 1.0], [[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(SingularSystemError):
        fit_least_squares(data)


def test_dataset_rejects_mixed_dimensions():
    data = TransitionDataset(2)
    data.append(unit_basis(0, 2), 0.0, unit_basis(1, 2))
    with pytest.raises(ValueError):
        data.append(unit_basis(0, 3), 0.0, unit_basis(1, 3))


# -- snapshots and action models ---------------------------------------------------

def test_snapshot_round_trip(rng, tmp_path):
    m = LinearModel(30)
    for _ in range(40):
        m.update(sparse_random(rng, 30, 0.1), float(rng.normal()), sparse_random(rng, 30, 0.1), 0.3)
    text = dumps_model(m)
    again = loads_model(text)
    assert dumps_model(again) == text
    assert again.triples() == m.triples() and np.array_equal(again.b, m.b)
    save_model(m, tmp_path / "m.txt")
    assert dumps_model(load_model(tmp_path / "m.txt")) == text


def test_snapshot_is_sorted_and_plain():
    m = LinearModel.from_dense([[0.0, 0.5], [0.25, 0.0]], [1.0, 0.0])
    assert dumps_model(m).splitlines() == [
        "# lineardyna-model v1", "n 2", "drop_tol 1e-08", "slots 2", "0 1", "b 1", "0 1.0", "F 2", "0 1 0.5", "1 0 0.25",
    ]
    with pytest.raises(ValueError):
        loads_model("garbage\n")


def test_action_models_share_slots(rng):
    ms = ActionModelSet.zeros(20, 3)
    assert all(m.slots is ms.slots for m in ms)
    ms[1].update(unit_basis(4, 20), 1.0, unit_basis(9, 20), 0.5)
    Fs, bs = ms.matrices()
    assert len(Fs) == 3 and all(F.shape == Fs[0].shape for F in Fs)
    assert ms[0].get(9, 4) == 0.0 and ms[1].get(9, 4) == 0.5


def test_snapshot_keeps_slot_order():
    m = LinearModel(10)
    m.update(unit_basis(7, 10), 1.0, unit_basis(2, 10), 0.5)
    m.update(unit_basis(4, 10), 1.0, unit_basis(7, 10), 0.5)
    again = loads_model(dumps_model(m))
    assert again.slots.features().tolist() == m.slots.features().tolist() == [7, 2, 4]


def test_action_models_reuse_matching_layouts(tmp_path):
    ms = ActionModelSet.zeros(10, 2)
    ms[0].update(unit_basis(5, 10), 1.0, unit_basis(1, 10), 0.5)
    loaded = ActionModelSet([loads_model(dumps_model(m)) for m in ms])
    assert loaded[0].slots is loaded[1].slots
    assert loaded.slots.features().tolist() == ms.slots.features().tolist()


def test_action_models_rehome_keeps_values(rng):
    a, _ = random_model(rng, 6)
    b, _ = random_model(rng, 6)
    dense = [a.to_dense(), b.to_dense()]
    ms = ActionModelSet([a, b])
    assert ms[0].slots is ms[1].slots
    for m, (F, bb) in zip(ms, dense):
        got = m.to_dense()
        assert np.array_equal(got[0], F) and np.array_equal(got[1], bb)
    with pytest.raises(ValueError):
        ActionModelSet([LinearModel(2), LinearModel(3)])
