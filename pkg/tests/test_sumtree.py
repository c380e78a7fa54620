import math

import numpy as np
import pytest

from acer.sumtree import REPLACING, SAMPLING, DoubleSumTree, prefix_search


def brute(tree):
    p = tree.priorities[:tree.capacity]
    return np.sum(p ** tree.alpha), np.sum(p ** -tree.alpha)


def test_small_tree_totals_and_search():
    t = DoubleSumTree(4, alpha=1.0)
    t.set(np.arange(4), [1.0, 2.0, 3.0, 4.0])
    assert t.sampling_total == pytest.approx(10.0)
    assert t.replacing_total == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 4)
    assert t.find(0.5) == 0
    assert t.find(1.0) == 1  # boundary goes right
    assert t.find(5.9) == 2
    assert t.find(9.99) == 3
    assert t.find(1.4, REPLACING) == 1
    assert t.last_visits == 3
    assert t.max_priority == 4.0


def test_search_never_lands_on_empty_leaf():
    t = DoubleSumTree(5, alpha=0.6)
    t.set([0, 1, 2], [1.0, 1.0, 1.0])
    total = t.sampling_total
    hits = t.find_many(np.linspace(0, np.nextafter(total, 0), 1000))
    assert set(hits.tolist()) <= {0, 1, 2}
    assert prefix_search(t, np.nextafter(total, 0)) == 2


def test_find_many_matches_find():
    rng = np.random.default_rng(3)
    t = DoubleSumTree(37, alpha=0.7)
    t.set(np.arange(37), rng.uniform(0.01, 5.0, 37))
    for factor, total in ((SAMPLING, t.sampling_total), (REPLACING, t.replacing_total)):
        u = rng.uniform(0, total, 500)
        assert np.array_equal(t.find_many(u, factor), [t.find(x, factor) for x in u])


def test_visits_bounded_by_depth():
    t = DoubleSumTree(100)
    t.set(np.arange(100), np.ones(100))
    for u in np.linspace(0, t.sampling_total * 0.999, 50):
        t.find(u)
        assert t.last_visits <= math.ceil(math.log2(100)) + 1


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan])
def test_rejects_non_positive_priority(bad):
    t = DoubleSumTree(4)
    with pytest.raises(ValueError):
        t.set(0, bad)


def test_rejects_bad_slot_and_target():
    t = DoubleSumTree(4)
    t.set(0, 1.0)
    with pytest.raises(IndexError):
        t.set(4, 1.0)
    with pytest.raises(ValueError):
        t.find(-0.1)
    with pytest.raises(ValueError):
        t.find(t.sampling_total + 1.0)


def test_overwrite_keeps_sums_consistent():
    rng = np.random.default_rng(0)
    t = DoubleSumTree(13, alpha=0.6)
    t.set(np.arange(13), rng.uniform(0.1, 2, 13))
    for _ in range(200):
        t.set(int(rng.integers(13)), float(rng.uniform(1e-3, 10)))
    s, r = brute(t)
    assert t.sampling_total == pytest.approx(s, rel=1e-12)
    assert t.replacing_total == pytest.approx(r, rel=1e-12)
    assert t.max_priority == pytest.approx(t.priorities[:13].max())


def test_clear():
    t = DoubleSumTree(8)
    t.set(np.arange(8), np.arange(1.0, 9.0))
    t.clear(np.arange(8))
    assert t.sampling_total == 0.0 and t.replacing_total == 0.0


def test_clear_single_slot():
    t = DoubleSumTree(4, alpha=1.0)
    t.set(np.arange(4), [1.0, 2.0, 3.0, 4.0])
    t.clear(2)
    assert t.sampling_total == pytest.approx(7.0)
    assert all(t.find(u) != 2 for u in np.linspace(0, 6.99, 50))


# property tests -----------------------------------------------------------------

from hypothesis import given, settings, strategies as st  # noqa: E402

prios = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=200, deadline=None, derandomize=True)
@given(cap=st.integers(1, 70), ops=st.lists(st.tuples(st.integers(0, 69), prios), min_size=1, max_size=60),
       alpha=st.floats(0.1, 1.0))
def test_roots_match_leaves(cap, ops, alpha):
    t = DoubleSumTree(cap, alpha)
    t.set(np.arange(cap), np.ones(cap))
    for slot, p in ops:
        t.set(slot % cap, p)
    s, r = brute(t)
    assert t.sampling_total == pytest.approx(s, rel=1e-9)
    assert t.replacing_total == pytest.approx(r, rel=1e-9)
    assert t.max_priority == t.priorities[:cap].max()


@settings(max_examples=200, deadline=None, derandomize=True)
@given(leaves=st.lists(prios, min_size=1, max_size=40), u=st.floats(0.0, 1.0, exclude_max=True))
def test_search_inverts_cumulative_sum(leaves, u):
    t = DoubleSumTree(len(leaves), alpha=1.0)
    t.set(np.arange(len(leaves)), leaves)
    target = u * t.sampling_total
    slot = t.find(target)
    cum = np.cumsum(t.sampling[t.size:t.size + len(leaves)])
    expect = int(np.searchsorted(cum, target, side="right"))
    near_edge = np.any(np.abs(cum - target) <= 1e-9 * t.sampling_total)
    if not near_edge:
        assert slot == expect
    assert t.priorities[slot] > 0
    assert t.last_visits <= math.ceil(math.log2(max(len(leaves), 1))) + 1
