"""Asynchronous priority refresh.

A refresher owns copies of the learner's networks and sweeps the replay
buffer in slot order, recomputing TD errors and rewriting priorities.  It can
run inline (``tick`` after every environment step, bit-reproducible) or on a
background thread woken once per step (``signal``); missed wake-ups coalesce,
so the thread never does more than ``A`` updates per wake-up.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass

import numpy as np

from . import curriculum as cur
from .nn import Mlp
from .replay import ReplayBuffer, ReplayMode, per_priority
from .td3 import NOISE_TABLE_SIZE, Td3Agent, twin_target

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RefreshConfig:
    A: int = 256
    enabled: bool = True

    def __post_init__(self):
        if self.A < 0:
            raise ValueError("A must be >= 0")


@dataclass(frozen=True)
class NetworkSnapshot:
    actor_target: Mlp
    critic1_target: Mlp
    critic2_target: Mlp
    critic1: Mlp
    critic2: Mlp
    version: int
    gamma: float
    noise_table: np.ndarray
    td_critic: str = "q1"

    @classmethod
    def from_agent(cls, agent: Td3Agent) -> "NetworkSnapshot":
        return cls(agent.actor_target.clone(), agent.critic1_target.clone(),
                   agent.critic2_target.clone(), agent.critic1.clone(), agent.critic2.clone(),
                   agent.learn_steps, agent.cfg.gamma, agent.noise_table, agent.cfg.td_critic)


def compute_td_errors(snap: NetworkSnapshot, states, actions, rewards, next_states, dones,
                      ids) -> np.ndarray:
    """``y - Q(s, a)`` with the id-indexed smoothing noise."""
    noise = snap.noise_table[np.asarray(ids) % NOISE_TABLE_SIZE]
    y = twin_target(snap.actor_target, snap.critic1_target, snap.critic2_target,
                    np.asarray(rewards, dtype=np.float64), np.atleast_2d(next_states),
                    np.asarray(dones), snap.gamma, noise)
    sa = np.concatenate([np.atleast_2d(states), np.atleast_2d(actions)], axis=1)
    q = snap.critic1.forward(sa)[:, 0]
    if snap.td_critic == "min":
        q = np.minimum(q, snap.critic2.forward(sa)[:, 0])
    return y - q


def compute_td_error(snap: NetworkSnapshot, exp, gamma: float | None = None) -> float:
    if gamma is not None and gamma != snap.gamma:
        snap = NetworkSnapshot(snap.actor_target, snap.critic1_target, snap.critic2_target,
                               snap.critic1, snap.critic2, snap.version, gamma,
                               snap.noise_table, snap.td_critic)
    td = compute_td_errors(snap, [exp.state], [exp.action], [exp.reward], [exp.next_state],
                           [exp.done], [max(exp.id, 0)])
    return float(td[0])


def priorities_from_td(td: np.ndarray, mode: ReplayMode, curriculum_state=None,
                       curriculum_cfg=None) -> np.ndarray:
    if mode is ReplayMode.ACER:
        return np.atleast_1d(cur.priority(td, curriculum_state.c, curriculum_cfg.k1, curriculum_cfg.k2))
    return np.atleast_1d(per_priority(td))


def oracle_priorities(buffer: ReplayBuffer, snap: NetworkSnapshot, mode: ReplayMode | None = None,
                      curriculum_state=None, curriculum_cfg=None, chunk: int = 4096) -> np.ndarray:
    """Priorities every stored experience would get from ``snap`` right now."""
    mode = buffer.mode if mode is None else mode
    out = np.empty(len(buffer))
    for lo in range(0, len(buffer), chunk):
        b = buffer.gather(np.arange(lo, min(lo + chunk, len(buffer))))
        td = compute_td_errors(snap, b.states, b.actions, b.rewards, b.next_states, b.dones, b.ids)
        out[lo:lo + len(b)] = priorities_from_td(td, mode, curriculum_state, curriculum_cfg)
    return out


def probability_gap(stored, oracle, alpha: float) -> tuple[np.ndarray, float]:
    """Per-slot ``P_oracle - P_stored`` of the ``p**alpha`` sampling law, and its mean magnitude."""
    s = np.asarray(stored, dtype=np.float64) ** alpha
    o = np.asarray(oracle, dtype=np.float64) ** alpha
    gap = o / o.sum() - s / s.sum()
    return gap, float(np.mean(np.abs(gap)))


class Refresher:
    """Sweeps the buffer with snapshot networks and rewrites priorities."""

    def __init__(self, buffer: ReplayBuffer, cfg: RefreshConfig,
                 curriculum_cfg: cur.CurriculumConfig | None = None):
        self.buffer = buffer
        self.cfg = cfg
        self.curriculum_cfg = curriculum_cfg
        self.cursor = 0
        self.total_updates = 0
        self.max_updates_per_tick = 0
        self.versions_seen: list[int] = []
        self._snapshot: NetworkSnapshot | None = None
        self._curriculum: cur.CurriculumState | None = None
        self._wake = threading.Event()
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self.error: BaseException | None = None

    @property
    def active(self) -> bool:
        return self.cfg.enabled and self.cfg.A > 0

    def publish(self, snapshot: NetworkSnapshot, curriculum_state: cur.CurriculumState | None = None):
        # one attribute store per field; tick() reads each exactly once
        self._snapshot = snapshot
        if curriculum_state is not None:
            self._curriculum = curriculum_state

    def tick(self) -> int:
        if not self.active or len(self.buffer) == 0:
            return 0
        snap, curr = self._snapshot, self._curriculum
        if snap is None:
            return 0
        with self.buffer.lock:
            slots, self.cursor = self.buffer.sweep_indices(self.cursor, self.cfg.A)
            batch = self.buffer.gather(slots)
        td = compute_td_errors(snap, batch.states, batch.actions, batch.rewards,
                               batch.next_states, batch.dones, batch.ids)
        prios = priorities_from_td(td, self.buffer.mode, curr, self.curriculum_cfg)
        with self.buffer.lock:
            # slots evicted while we computed now hold other experiences; skip them
            live = self.buffer.ids[slots] == batch.ids
            self.buffer.update_priorities(slots[live], prios[live])
        n = int(live.sum())
        self.total_updates += n
        self.max_updates_per_tick = max(self.max_updates_per_tick, n)
        if not self.versions_seen or self.versions_seen[-1] != snap.version:
            self.versions_seen.append(snap.version)
        return n

    # threaded mode ------------------------------------------------------------

    def start(self) -> None:
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._run, name="acer-refresher", daemon=True)
        self._thread.start()

    def signal(self) -> None:
        self._wake.set()

    def _run(self) -> None:
        while not self._stop.is_set():
            if not self._wake.wait(timeout=0.05):
                continue
            self._wake.clear()
            try:
                self.tick()
            except BaseException as exc:  # surfaced to the learner via stop()
                log.exception("refresher failed")
                self.error = exc
                return

    def stop(self) -> None:
        if self._thread is None:
            return
        self._stop.set()
        self._wake.set()
        self._thread.join()
        self._thread = None
        if self.error is not None:
            raise RuntimeError("refresher thread failed") from self.error


def refresh_tick(buffer: ReplayBuffer, snapshot: NetworkSnapshot, curriculum_state,
                 curriculum_cfg, cfg: RefreshConfig, cursor: int = 0) -> tuple[int, int]:
    """One stateless sweep step; returns ``(updated, new_cursor)``."""
    r = Refresher(buffer, cfg, curriculum_cfg)
    r.cursor = cursor
    r.publish(snapshot, curriculum_state)
    n = r.tick()
    return n, r.cursor
