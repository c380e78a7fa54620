import threading

import numpy as np
import pytest

from acer.curriculum import CurriculumConfig, CurriculumState
from acer.refresh import (NetworkSnapshot, RefreshConfig, Refresher, compute_td_error,
                          oracle_priorities, probability_gap, refresh_tick)
from acer.replay import ReplayBuffer
from acer.td3 import Td3Agent, Td3Config

CC = CurriculumConfig(c_init=0.5)
CS = CurriculumState.initial(CC)


def setup(n=50, capacity=64, seed=0):
    rng = np.random.default_rng(seed)
    agent = Td3Agent(3, 1, Td3Config(hidden=(8,)), rng=rng)
    buf = ReplayBuffer(capacity, 3, 1, "acer", rng=rng)
    for _ in range(n):
        buf.add(rng.normal(size=3), rng.uniform(-1, 1, 1), rng.normal(), rng.normal(size=3), False)
    return agent, buf


def test_full_sweep_matches_oracle():
    agent, buf = setup()
    snap = NetworkSnapshot.from_agent(agent)
    r = Refresher(buf, RefreshConfig(A=16), CC)
    r.publish(snap, CS)
    for _ in range(4):
        assert r.tick() <= 16
    assert np.array_equal(buf.priorities, oracle_priorities(buf, snap, None, CS, CC))
    assert r.total_updates == 50 + 14  # 4 ticks of 16 over 50 slots
    _, gap = probability_gap(buf.priorities, oracle_priorities(buf, snap, None, CS, CC), 0.6)
    assert gap == 0.0


def test_single_td_error_matches_batch():
    agent, buf = setup()
    snap = NetworkSnapshot.from_agent(agent)
    exp = buf.gather([7]).experiences()[0]
    batch_prio = oracle_priorities(buf, snap, None, CS, CC)[7]
    from acer.curriculum import priority
    assert priority(compute_td_error(snap, exp), CS.c, CC.k1, CC.k2) == pytest.approx(batch_prio, abs=1e-15)


def test_refresh_tick_helper_and_disabled():
    agent, buf = setup(n=10)
    snap = NetworkSnapshot.from_agent(agent)
    n, cur = refresh_tick(buf, snap, CS, CC, RefreshConfig(A=4), cursor=8)
    assert n == 4 and cur == 2
    r = Refresher(buf, RefreshConfig(A=0), CC)
    r.publish(snap, CS)
    assert not r.active and r.tick() == 0


def test_snapshot_is_decoupled_from_learner():
    agent, buf = setup()
    snap = NetworkSnapshot.from_agent(agent)
    before = oracle_priorities(buf, snap, None, CS, CC)
    agent.critic1.params += 1.0
    assert np.array_equal(before, oracle_priorities(buf, snap, None, CS, CC))


def test_evicted_slots_are_skipped():
    agent, buf = setup(n=8, capacity=8)
    snap = NetworkSnapshot.from_agent(agent)
    r = Refresher(buf, RefreshConfig(A=8), CC)
    r.publish(snap, CS)
    real_gather = buf.gather

    def gather_then_evict(slots):
        b = real_gather(slots)
        buf.add(np.zeros(3), np.zeros(1), 0.0, np.zeros(3), False)  # overwrite one slot
        return b

    buf.gather = gather_then_evict
    assert r.tick() == 7


def test_threaded_refresher_under_concurrent_stores():
    agent, buf = setup(n=64, capacity=64)
    r = Refresher(buf, RefreshConfig(A=32), CC)
    r.publish(NetworkSnapshot.from_agent(agent), CS)
    r.start()
    rng = np.random.default_rng(1)
    stop = threading.Event()

    def writer():
        while not stop.is_set():
            buf.add(rng.normal(size=3), rng.uniform(-1, 1, 1), 0.0, rng.normal(size=3), False)

    th = threading.Thread(target=writer)
    th.start()
    for _ in range(200):
        r.signal()
        buf.sample(16, 0.5)
    stop.set()
    th.join()
    r.stop()
    t = buf.tree
    leaves = t.priorities[:64]
    assert t.sampling_total == pytest.approx(np.sum(leaves ** 0.6), rel=1e-9)
    assert r.max_updates_per_tick <= 32 and r.total_updates > 0
