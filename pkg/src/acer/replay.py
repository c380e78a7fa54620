"""Experience replay with uniform, clipped-PER and ACER modes.

The ACER mode combines the double sum-tree (prioritized sampling plus
first-in-useless-out eviction) with a FIFO temporary pool of the newest
experience ids that are force-included in every batch.
"""
from __future__ import annotations

import csv
import threading
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .sumtree import REPLACING, SAMPLING, DoubleSumTree

PER_EPSILON = 1e-6
MAX_RESAMPLES = 16
SNAPSHOT_COLUMNS = ("slot", "id", "priority")


class ReplayMode(str, Enum):
    UNIFORM = "uniform"
    PER = "per"
    ACER = "acer"

    @classmethod
    def parse(cls, value) -> "ReplayMode":
        if isinstance(value, cls):
            return value
        aliases = {"per_clipped": "per", "td3": "uniform"}
        return cls(aliases.get(str(value).lower(), str(value).lower()))


class InsufficientExperiences(RuntimeError):
    pass


@dataclass
class Experience:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray
    done: bool
    id: int = -1


@dataclass
class SampledBatch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray
    ids: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    from_temporary: np.ndarray

    def __len__(self):
        return self.indices.shape[0]

    def experiences(self) -> list[Experience]:
        return [
            Experience(self.states[i], self.actions[i], float(self.rewards[i]),
                       self.next_states[i], bool(self.dones[i]), int(self.ids[i]))
            for i in range(len(self))
        ]


def per_priority(td_error, eps: float = PER_EPSILON):
    """Clipped PER priority ``min(|delta|, 1) + eps``."""
    out = np.minimum(np.abs(np.asarray(td_error, dtype=np.float64)), 1.0) + eps
    return float(out) if out.ndim == 0 else out


class ReplayBuffer:
    """Fixed-capacity experience store shared by the learner and the refresher.

    Every public method runs under ``self.lock``.
    """

    def __init__(
        self,
        capacity: int,
        state_dim: int,
        action_dim: int,
        mode="acer",
        alpha: float = 0.6,
        temp_pool: int = 5,
        eviction: str = "stochastic",
        rng: np.random.Generator | None = None,
    ):
        self.mode = ReplayMode.parse(mode)
        if eviction not in ("stochastic", "min"):
            raise ValueError("eviction must be 'stochastic' or 'min'")
        self.capacity = int(capacity)
        self.eviction = eviction
        self.rng = rng if rng is not None else np.random.default_rng()
        self.tree = DoubleSumTree(capacity, alpha)
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.dones = np.zeros(capacity, dtype=bool)
        self.ids = np.full(capacity, -1, dtype=np.int64)
        self.occupancy = 0
        self.next_id = 0
        self._fifo_cursor = 0
        n_tp = temp_pool if self.mode is ReplayMode.ACER else 0
        self.temp_capacity = int(n_tp)
        self.temp_pool: deque[tuple[int, int]] = deque(maxlen=max(self.temp_capacity, 1))
        self.lock = threading.RLock()

    def __len__(self):
        return self.occupancy

    @property
    def alpha(self) -> float:
        return self.tree.alpha

    @property
    def priorities(self) -> np.ndarray:
        return self.tree.priorities[:self.occupancy]

    def _evict_slot(self) -> int:
        if self.mode is not ReplayMode.ACER:
            slot = self._fifo_cursor
            self._fifo_cursor = (self._fifo_cursor + 1) % self.capacity
            return slot
        if self.eviction == "min":
            return int(np.argmin(self.tree.priorities))
        total = self.tree.replacing_total
        return self.tree.find(self.rng.uniform(0.0, total), REPLACING)

    def store(self, exp: Experience) -> int:
        with self.lock:
            max_p = self.tree.max_priority if self.occupancy else 1.0
            if self.occupancy < self.capacity:
                slot = self.occupancy
                self.occupancy += 1
            else:
                slot = self._evict_slot()
            self.states[slot] = exp.state
            self.actions[slot] = exp.action
            self.rewards[slot] = exp.reward
            self.next_states[slot] = exp.next_state
            self.dones[slot] = exp.done
            self.ids[slot] = self.next_id
            exp.id = self.next_id
            self.next_id += 1
            self.tree.set(slot, max_p)
            if self.temp_capacity:
                self.temp_pool.append((int(self.ids[slot]), slot))
            return slot

    def add(self, state, action, reward, next_state, done) -> int:
        return self.store(Experience(np.asarray(state), np.asarray(action), float(reward),
                                     np.asarray(next_state), bool(done)))

    def temporary_slots(self) -> list[int]:
        """Slots of live experiences referenced by the temporary pool."""
        with self.lock:
            return [slot for eid, slot in self.temp_pool if self.ids[slot] == eid]

    def _stratified(self, n: int, taken: set[int]) -> list[int]:
        total = self.tree.sampling_total
        seg = total / n
        out = []
        for k in range(n):
            lo = seg * k
            slot = -1
            for _ in range(MAX_RESAMPLES):
                u = min(lo + self.rng.uniform(0.0, seg), np.nextafter(total, 0.0))
                cand = self.tree.find(u, SAMPLING)
                if cand not in taken:
                    slot = cand
                    break
            if slot < 0:
                start = cand
                for step in range(1, self.occupancy + 1):
                    probe = (start + step) % self.occupancy
                    if probe not in taken:
                        slot = probe
                        break
            taken.add(slot)
            out.append(slot)
        return out

    def sample(self, n: int, beta: float = 0.4) -> SampledBatch:
        with self.lock:
            if n > self.occupancy:
                raise InsufficientExperiences(f"need {n} experiences, have {self.occupancy}")
            if not 0.0 <= beta <= 1.0:
                raise ValueError("beta must lie in [0, 1]")
            if self.mode is ReplayMode.UNIFORM:
                idx = self.rng.choice(self.occupancy, size=n, replace=False)
                weights = np.ones(n)
                temp = np.zeros(n, dtype=bool)
            else:
                head = self.temporary_slots()[:n]
                rest = self._stratified(n - len(head), set(head)) if n > len(head) else []
                idx = np.array(head + rest, dtype=np.int64)
                temp = np.zeros(n, dtype=bool)
                temp[:len(head)] = True
                probs = self.tree.sampling[self.tree.size + idx] / self.tree.sampling_total
                weights = (self.occupancy * probs) ** (-beta)
                weights /= weights.max()
            return SampledBatch(
                self.states[idx].copy(), self.actions[idx].copy(), self.rewards[idx].copy(),
                self.next_states[idx].copy(), self.dones[idx].copy(), self.ids[idx].copy(),
                np.asarray(idx, dtype=np.int64), weights, temp,
            )

    def draw_slots(self, n: int) -> np.ndarray:
        """``n`` independent draws (with replacement) proportional to ``p**alpha``."""
        with self.lock:
            total = self.tree.sampling_total
            u = self.rng.uniform(0.0, total, n)
            return self.tree.find_many(np.minimum(u, np.nextafter(total, 0.0)), SAMPLING)

    def sampling_probabilities(self) -> np.ndarray:
        with self.lock:
            f = self.tree.leaf_factors(SAMPLING)[:self.occupancy]
            return f / f.sum()

    def replacing_probabilities(self) -> np.ndarray:
        with self.lock:
            f = self.tree.leaf_factors(REPLACING)[:self.occupancy]
            return f / f.sum()

    def update_priority(self, slot: int, new_p: float) -> None:
        if not 0 <= slot < self.occupancy:
            raise IndexError("slot not occupied")
        with self.lock:
            self.tree.set(int(slot), float(new_p))

    def update_priorities(self, slots, new_ps) -> None:
        slots = np.asarray(slots, dtype=np.int64)
        if slots.size and (slots.min() < 0 or slots.max() >= self.occupancy):
            raise IndexError("slot not occupied")
        with self.lock:
            self.tree.set(slots, new_ps)

    def sweep_indices(self, cursor: int, count: int) -> tuple[np.ndarray, int]:
        with self.lock:
            if self.occupancy == 0:
                raise InsufficientExperiences("empty buffer")
            cursor %= self.occupancy
            count = min(int(count), self.occupancy)
            idx = (cursor + np.arange(count)) % self.occupancy
            return idx.astype(np.int64), int((cursor + count) % self.occupancy)

    def gather(self, slots) -> SampledBatch:
        """Copy the experiences at ``slots`` (unit weights)."""
        with self.lock:
            idx = np.asarray(slots, dtype=np.int64)
            n = idx.shape[0]
            return SampledBatch(
                self.states[idx].copy(), self.actions[idx].copy(), self.rewards[idx].copy(),
                self.next_states[idx].copy(), self.dones[idx].copy(), self.ids[idx].copy(),
                idx, np.ones(n), np.zeros(n, dtype=bool),
            )

    def snapshot(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with self.lock:
            n = self.occupancy
            return np.arange(n), self.ids[:n].copy(), self.tree.priorities[:n].copy()

    def export_snapshot_csv(self, path) -> None:
        slots, ids, prios = self.snapshot()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SNAPSHOT_COLUMNS)
            for row in zip(slots, ids, prios):
                w.writerow([int(row[0]), int(row[1]), repr(float(row[2]))])


def sweep_indices(buffer: ReplayBuffer, cursor: int, count: int):
    return buffer.sweep_indices(cursor, count)
