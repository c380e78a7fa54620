import numpy as np
import pytest

from acer.curriculum import CurriculumConfig, CurriculumState
from acer.nn import numeric_gradient
from acer.replay import ReplayBuffer
from acer.td3 import Td3Agent, Td3Config, twin_target


def make(seed=0, **kw):
    return Td3Agent(3, 2, Td3Config(hidden=(8, 8), **kw), rng=np.random.default_rng(seed))


def fill(buf, n, rng):
    for _ in range(n):
        buf.add(rng.normal(size=3), rng.uniform(-1, 1, 2), rng.normal(), rng.normal(size=3),
                bool(rng.random() < 0.1))


def test_twin_target_uses_min_and_done_mask():
    ag = make()
    s2 = np.zeros((2, 3))
    noise = np.zeros((2, 2))
    y = twin_target(ag.actor_target, ag.critic1_target, ag.critic2_target, np.array([1.0, 1.0]),
                    s2, np.array([False, True]), 0.9, noise)
    sa = np.concatenate([s2, ag.actor_target.forward(s2)], axis=1)
    q = np.minimum(ag.critic1_target.forward(sa), ag.critic2_target.forward(sa))[:, 0]
    assert y[0] == pytest.approx(1.0 + 0.9 * q[0])
    assert y[1] == 1.0


def test_actor_gradient_finite_difference():
    ag = make(1)
    s = np.random.default_rng(0).normal(size=(5, 3))
    _, grad = ag.actor_gradient(s)

    def f(p):
        old = ag.actor.params
        ag.actor.params = p
        loss = ag.actor_gradient(s)[0]
        ag.actor.params = old
        return loss

    num = numeric_gradient(f, ag.actor.params.copy())
    assert np.max(np.abs(grad - num)) < 1e-6 * max(1.0, np.abs(num).max())


def test_actor_delay_and_targets():
    rng = np.random.default_rng(0)
    ag = make(actor_delay=3)
    buf = ReplayBuffer(100, 3, 2, "uniform", rng=rng)
    fill(buf, 50, rng)
    before = ag.actor_target.params.copy()
    reports = [ag.learn(buf, 8, 0.4) for _ in range(6)]
    assert [r.actor_updated for r in reports] == [False, False, True, False, False, True]
    assert ag.actor_updates == 2
    assert not np.array_equal(before, ag.actor_target.params)


def test_learn_writes_priorities_in_acer_mode():
    rng = np.random.default_rng(0)
    ag = make()
    buf = ReplayBuffer(100, 3, 2, "acer", rng=rng)
    fill(buf, 40, rng)
    cc = CurriculumConfig()
    rep = ag.learn(buf, 8, 0.4, CurriculumState.initial(cc), cc)
    assert np.allclose(buf.tree.priorities[rep.indices], rep.new_priorities)
    with pytest.raises(ValueError):
        ag.learn(buf, 8, 0.4)


def test_checkpoint_roundtrip(tmp_path):
    ag = make(td_critic="min")
    path = tmp_path / "a.bin"
    ag.save(path)
    back = Td3Agent.load(path)
    assert back.cfg == ag.cfg
    s = np.ones(3)
    assert np.array_equal(back.act(s, explore=False), ag.act(s, explore=False))
    assert np.array_equal(back.noise_table, ag.noise_table)


def test_config_validation():
    with pytest.raises(ValueError):
        Td3Config(actor_delay=0)
    with pytest.raises(ValueError):
        Td3Config(td_critic="max")
