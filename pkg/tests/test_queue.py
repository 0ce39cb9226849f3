import pytest
from hypothesis import given, strategies as st

from lineardyna.planners import PRIORITY_FLOOR, SweepQueue


def test_push_pop_basic():
    q = SweepQueue(10)
    assert not q and len(q) == 0
    assert q.push(3, 0.5) and q.push(7, 2.0)
    assert 3 in q and 4 not in q and len(q) == 2
    assert q.pop_item() == (7, 2.0)
    assert q.pop() == 3
    with pytest.raises(IndexError):
        q.pop()


def test_max_merge():
    q = SweepQueue(5)
    q.push(1, 0.3)
    assert not q.push(1, 0.1)
    assert q.priority(1) == 0.3
    assert q.push(1, 0.9)
    assert q.priority(1) == 0.9 and len(q) == 1


def test_floor_drops_dust():
    q = SweepQueue(5)
    assert not q.push(0, PRIORITY_FLOOR)
    assert not q.push(0, 0.0)
    assert q.push(0, 2 * PRIORITY_FLOOR)
    with pytest.raises(KeyError):
        q.priority(1)


def test_ties_pop_lowest_index_first():
    q = SweepQueue(6)
    for i in (4, 1, 5, 2):
        q.push(i, 1.0)
    assert [q.pop() for _ in range(4)] == [1, 2, 4, 5]


def test_items_and_clear():
    q = SweepQueue(6)
    q.push(5, 0.2)
    q.push(0, 0.1)
    assert q.items() == [(0, 0.1), (5, 0.2)]
    q.clear()
    assert len(q) == 0 and q.items() == []


def test_bad_arguments():
    with pytest.raises(ValueError):
        SweepQueue(0)
    with pytest.raises(IndexError):
        SweepQueue(3).push(3, 1.0)


pushes = st.lists(st.tuples(st.integers(0, 19), st.floats(0, 100)), max_size=60)


@given(pushes)
def test_pops_are_non_increasing_and_match_max_merge(seq):
    q = SweepQueue(20)
    oracle = {}
    for i, p in seq:
        q.push(i, p)
        if p > PRIORITY_FLOOR:
            oracle[i] = max(oracle.get(i, 0.0), p)
    assert len(q) == len(oracle) <= 20
    popped = []
    while q:
        popped.append(q.pop_item())
    assert [p for _, p in popped] == sorted((p for _, p in popped), reverse=True)
    assert dict(popped) == oracle
    # ties resolved by index
    for (i, p), (j, r) in zip(popped, popped[1:]):
        if p == r:
            assert i < j
