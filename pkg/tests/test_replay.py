import csv

import numpy as np
import pytest

from acer.replay import InsufficientExperiences, ReplayBuffer, ReplayMode, per_priority


def filled(mode="acer", capacity=8, n=None, temp_pool=2, seed=0, **kw):
    buf = ReplayBuffer(capacity, 2, 1, mode, temp_pool=temp_pool,
                       rng=np.random.default_rng(seed), **kw)
    for k in range(capacity if n is None else n):
        buf.add([k, k], [0.0], float(k), [k + 1, k + 1], False)
    return buf


def test_mode_parse():
    assert ReplayMode.parse("per_clipped") is ReplayMode.PER
    assert ReplayMode.parse("td3") is ReplayMode.UNIFORM
    with pytest.raises(ValueError):
        ReplayMode.parse("nope")


def test_new_experience_gets_max_priority():
    buf = filled(n=3)
    buf.update_priority(1, 5.0)
    slot = buf.add([0, 0], [0.0], 0.0, [0, 0], False)
    assert buf.priorities[slot] == 5.0


def test_fifo_eviction_in_uniform_and_per():
    for mode in ("uniform", "per"):
        buf = filled(mode, capacity=4)
        slot = buf.add([9, 9], [0.0], 9.0, [9, 9], True)
        assert slot == 0 and buf.ids[0] == 4


def test_min_eviction_drops_lowest_priority():
    buf = filled(capacity=4, eviction="min")
    buf.update_priorities([0, 1, 2, 3], [3.0, 0.5, 2.0, 4.0])
    assert buf.add([9, 9], [0.0], 9.0, [9, 9], False) == 1


def test_temporary_pool_is_included_and_validated():
    buf = filled(capacity=16, n=16, temp_pool=3)
    batch = buf.sample(6, beta=0.5)
    newest = set(np.flatnonzero(buf.ids >= 13).tolist())
    assert set(batch.indices[batch.from_temporary].tolist()) == newest
    assert len(set(batch.indices.tolist())) == 6
    # overwrite a pooled slot with a fresh experience: the stale (id, slot) pair must drop
    buf.temp_pool.appendleft((999, 0))
    assert 0 not in buf.temporary_slots() or buf.ids[0] == 999


def test_weights_normalized():
    buf = filled(mode="per", capacity=8)
    buf.update_priorities(np.arange(8), np.arange(1.0, 9.0))
    b = buf.sample(4, beta=1.0)
    assert b.weights.max() == pytest.approx(1.0)
    probs = buf.sampling_probabilities()[b.indices]
    raw = (8 * probs) ** -1.0
    assert np.allclose(b.weights, raw / raw.max())


def test_uniform_weights_are_one():
    b = filled("uniform").sample(4)
    assert np.all(b.weights == 1.0)


def test_errors():
    buf = filled(n=2)
    with pytest.raises(InsufficientExperiences):
        buf.sample(3)
    with pytest.raises(ValueError):
        buf.sample(1, beta=1.5)
    with pytest.raises(IndexError):
        buf.update_priority(5, 1.0)


def test_per_priority_clip():
    assert np.allclose(per_priority(np.array([-3.0, 0.5, 0.0])), [1 + 1e-6, 0.5 + 1e-6, 1e-6])


def test_sweep_wraps_and_caps():
    buf = filled(n=5)
    idx, cur = buf.sweep_indices(3, 4)
    assert idx.tolist() == [3, 4, 0, 1] and cur == 2
    idx, _ = buf.sweep_indices(0, 50)
    assert len(idx) == 5


def test_snapshot_csv(tmp_path):
    buf = filled(n=3)
    path = tmp_path / "snap.csv"
    buf.export_snapshot_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["slot", "id", "priority"] and len(rows) == 4
