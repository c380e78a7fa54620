"""Double sum-tree: prefix sums of ``p**alpha`` and ``p**-alpha`` over the leaves.

Nodes are stored heap-style in flat arrays (root at index 1, children of
``i`` at ``2i`` and ``2i+1``, leaf ``k`` at ``size + k`` where ``size`` is the
capacity rounded up to a power of two).  A third array tracks the subtree
maximum of the raw priority so the current maximum is available in O(1).
Empty leaves hold zero in all three arrays and can never be selected.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import HAS_NUMBA, njit

SAMPLING = 0
REPLACING = 1


@njit
def _set_leaves_nb(samp, rep, mx, size, slots, samp_vals, rep_vals, prio_vals):
    for j in range(slots.shape[0]):
        i = slots[j] + size
        samp[i] = samp_vals[j]
        rep[i] = rep_vals[j]
        mx[i] = prio_vals[j]
        i //= 2
        while i >= 1:
            left = 2 * i
            samp[i] = samp[left] + samp[left + 1]
            rep[i] = rep[left] + rep[left + 1]
            mx[i] = max(mx[left], mx[left + 1])
            i //= 2


def _set_leaves_py(samp, rep, mx, size, slots, samp_vals, rep_vals, prio_vals):
    leaves = slots + size
    samp[leaves] = samp_vals
    rep[leaves] = rep_vals
    mx[leaves] = prio_vals
    nodes = np.unique(leaves // 2)
    while nodes.size and nodes[0] >= 1:
        left = 2 * nodes
        samp[nodes] = samp[left] + samp[left + 1]
        rep[nodes] = rep[left] + rep[left + 1]
        mx[nodes] = np.maximum(mx[left], mx[left + 1])
        if nodes[-1] == 1:
            break
        nodes = np.unique(nodes // 2)


@njit
def _search_one_nb(tree, size, target):
    """Descend to the leaf whose cumulative interval holds ``target``.

    Returns ``(leaf, visits)``; visits counts every node touched, root
    included.  Boundary values go right.  A right subtree with zero mass is
    never entered, which absorbs floating-point overshoot at the top end.
    """
    i = 1
    visits = 1
    while i < size:
        left = 2 * i
        if target < tree[left] or tree[left + 1] <= 0.0:
            i = left
        else:
            target -= tree[left]
            i = left + 1
        visits += 1
    return i - size, visits


@njit
def _search_many_nb(tree, size, targets):
    out = np.empty(targets.shape[0], dtype=np.int64)
    for j in range(targets.shape[0]):
        leaf, _ = _search_one_nb(tree, size, targets[j])
        out[j] = leaf
    return out


def _search_many_np(tree, size, targets):
    idx = np.ones(targets.shape[0], dtype=np.int64)
    t = np.array(targets, dtype=np.float64)
    while idx[0] < size:
        left = 2 * idx
        lsum = tree[left]
        go_left = (t < lsum) | (tree[left + 1] <= 0.0)
        t = np.where(go_left, t, t - lsum)
        idx = np.where(go_left, left, left + 1)
    return idx - size


def _search_one_py(tree, size, target):
    i, visits = 1, 1
    while i < size:
        left = 2 * i
        if target < tree[left] or tree[left + 1] <= 0.0:
            i = left
        else:
            target -= tree[left]
            i = left + 1
        visits += 1
    return i - size, visits


if HAS_NUMBA:
    _set_leaves, _search_one, _search_many = _set_leaves_nb, _search_one_nb, _search_many_nb
else:
    _set_leaves, _search_one, _search_many = _set_leaves_py, _search_one_py, _search_many_np


class DoubleSumTree:
    """Sum-tree carrying a sampling factor and a replacing factor per leaf."""

    def __init__(self, capacity: int, alpha: float = 0.6):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.alpha = float(alpha)
        self.size = 1 << max(0, (self.capacity - 1).bit_length())
        self.sampling = np.zeros(2 * self.size)
        self.replacing = np.zeros(2 * self.size)
        self.max_tree = np.zeros(2 * self.size)
        self.priorities = np.zeros(self.capacity)
        self.last_visits = 0

    def __len__(self):
        return self.capacity

    @property
    def sampling_total(self) -> float:
        return float(self.sampling[1])

    @property
    def replacing_total(self) -> float:
        return float(self.replacing[1])

    @property
    def max_priority(self) -> float:
        return float(self.max_tree[1])

    def _tree(self, factor) -> np.ndarray:
        if factor in (SAMPLING, "sampling"):
            return self.sampling
        if factor in (REPLACING, "replacing"):
            return self.replacing
        raise ValueError(f"unknown factor {factor!r}")

    def set(self, slots, priorities) -> None:
        if isinstance(slots, (int, np.integer)) and isinstance(priorities, (float, int, np.floating)):
            self._set_one(int(slots), float(priorities))
            return
        slots = np.atleast_1d(np.asarray(slots, dtype=np.int64))
        prio = np.atleast_1d(np.asarray(priorities, dtype=np.float64))
        if prio.shape != slots.shape:
            prio = np.broadcast_to(prio, slots.shape).copy()
        if slots.size == 0:
            return
        if np.any(slots < 0) or np.any(slots >= self.capacity):
            raise IndexError("slot out of range")
        if not np.all(prio > 0.0) or not np.all(np.isfinite(prio)):
            raise ValueError("priorities must be positive and finite")
        scaled = prio ** self.alpha
        self.priorities[slots] = prio
        _set_leaves(self.sampling, self.replacing, self.max_tree, self.size,
                    slots, scaled, 1.0 / scaled, prio)

    def _set_one(self, slot: int, prio: float) -> None:
        # scalar path: the per-store cost matters when the buffer is tiny
        if not 0 <= slot < self.capacity:
            raise IndexError("slot out of range")
        if not (prio > 0.0 and math.isfinite(prio)):
            raise ValueError("priorities must be positive and finite")
        scaled = prio ** self.alpha
        self.priorities[slot] = prio
        _set_leaves(self.sampling, self.replacing, self.max_tree, self.size,
                    np.array([slot], dtype=np.int64), np.array([scaled]), np.array([1.0 / scaled]),
                    np.array([prio]))

    def clear(self, slots) -> None:
        slots = np.atleast_1d(np.asarray(slots, dtype=np.int64))
        zeros = np.zeros(slots.shape[0])
        self.priorities[slots] = 0.0
        _set_leaves(self.sampling, self.replacing, self.max_tree, self.size,
                    slots, zeros, zeros, zeros)

    def find(self, target: float, factor=SAMPLING) -> int:
        tree = self._tree(factor)
        if not 0.0 <= target < tree[1]:
            raise ValueError(f"target {target} outside [0, {tree[1]})")
        leaf, visits = _search_one(tree, self.size, float(target))
        self.last_visits = int(visits)
        return int(leaf)

    def find_many(self, targets, factor=SAMPLING) -> np.ndarray:
        tree = self._tree(factor)
        targets = np.asarray(targets, dtype=np.float64)
        if targets.size and (targets.min() < 0.0 or targets.max() >= tree[1]):
            raise ValueError("target outside the tree range")
        return _search_many(tree, self.size, targets)

    def leaf_factors(self, factor=SAMPLING) -> np.ndarray:
        return self._tree(factor)[self.size:self.size + self.capacity].copy()


def prefix_search(tree: DoubleSumTree, target: float, factor=SAMPLING) -> int:
    return tree.find(target, factor)
