import math

import numpy as np
import pytest

from acer.envs import (ArenaConfig, ConfigurationError, Terminal, ToyEnv, UavEnv, UavPhysical,
                       UsageError, load_scenario, parse_scenario, reduced_arena)
from acer.envs.radar import body_ray_directions, cast_rays, rotate_body_to_world, scan_numpy
from acer.envs.uav import Obstacle, attitude, reward_terms, step_dynamics


def level_uav(pos, heading=0.0, speed=70.0):
    v = speed * np.array([math.cos(heading), math.sin(heading), 0.0])
    return UavPhysical(np.asarray(pos, float), v, *attitude(v))


def test_gravity_cancellation_is_exact():
    u = level_uav([0.0, 0.0, 500.0])
    for _ in range(100):
        u = step_dynamics(u, np.array([0.0, 0.0, 1.0]), 1.0)
    assert np.array_equal(u.position, np.array([7000.0, 0.0, 500.0]))


def test_speed_band_and_attitude():
    u = level_uav([0, 0, 500])
    u = step_dynamics(u, np.array([15.0, 0, 1.0]), 1.0)
    assert u.speed == pytest.approx(103.0)
    u = step_dynamics(level_uav([0, 0, 500]), np.array([-6.0, 0, 1.0]), 1.0)
    assert u.speed == pytest.approx(30.0)
    assert u.velocity[0] > 0
    assert (u.pitch, u.yaw) == attitude(u.velocity)


def test_yaw_is_quadrant_aware():
    assert attitude([-1.0, -1.0, 0.0])[1] == pytest.approx(-3 * math.pi / 4)


def test_ray_directions_and_rotation():
    d = body_ray_directions(np.linspace(-60, 60, 8), (-30, -15, 0, 10))
    assert d.shape == (32, 3) and np.allclose(np.linalg.norm(d, axis=1), 1.0)
    fwd = rotate_body_to_world(np.array([[1.0, 0, 0]]), math.pi / 2, 0.0)
    assert np.allclose(fwd, [[0, 1, 0]])
    up = rotate_body_to_world(np.array([[1.0, 0, 0]]), 0.0, math.pi / 2)
    assert np.allclose(up, [[0, 0, 1]])


def test_radar_hits_dome_ground_and_cap():
    origin = np.array([0.0, 0.0, 100.0])
    dirs = np.array([[1.0, 0, 0], [0, 0, -1.0], [0, 0, 1.0]])
    r = cast_rays(origin, dirs, np.array([[1000.0, 0.0]]), np.array([300.0]), 5000.0)
    assert r[0] == pytest.approx(1000.0 - math.sqrt(300.0 ** 2 - 100.0 ** 2))
    assert r[1] == pytest.approx(100.0)
    assert r[2] == 5000.0
    inside = cast_rays(np.array([1000.0, 0, 10]), dirs, np.array([[1000.0, 0]]), np.array([300.0]), 5000.0)
    assert np.all(inside == 0.0)


def test_radar_backends_agree():
    rng = np.random.default_rng(0)
    dirs = rotate_body_to_world(body_ray_directions(np.linspace(-60, 60, 8), (-30, -15, 0, 10)), 0.3, 0.1)
    for _ in range(50):
        c = rng.uniform(0, 3000, (5, 2))
        r = rng.uniform(100, 800, 5)
        o = np.array([*rng.uniform(0, 3000, 2), rng.uniform(1, 1000)])
        assert np.allclose(cast_rays(o, dirs, c, r, 2000.0), scan_numpy(o, dirs, c, r, 2000.0))


def test_termination_order():
    env = UavEnv(reduced_arena())
    env.set_state(level_uav([100.0, 100.0, 50.0]), [100.0, 100.0, 0.0], [Obstacle(np.array([100.0, 100.0]), 200.0)])
    # inside both obstacle and target: collision wins
    assert env.classify(np.array([100.0, 100.0, 10.0])) is Terminal.COLLISION
    env.obstacles = []
    assert env.classify(np.array([100.0, 100.0, 0.0])) is Terminal.OUT_OF_RANGE
    assert env.classify(np.array([100.0, 100.0, 10.0])) is Terminal.SUCCESS
    env.t = env.max_steps
    assert env.classify(np.array([5000.0, 5000.0, 500.0])) is Terminal.TIMEOUT


def test_uav_episode_and_reset_rules():
    env = UavEnv(reduced_arena(), seed=3)
    obs = env.reset()
    a = env.arena
    assert obs.shape == (env.obs_dim,) == (38,)
    assert np.linalg.norm(env.uav.position - env.target) > a.min_start_distance
    for o in env.obstacles:
        assert np.linalg.norm(o.center - env.target[:2]) > o.radius + a.target_radius
    out = None
    while out is None or not out.done:
        out = env.step(np.zeros(3))
    assert out.terminal is not Terminal.RUNNING
    with pytest.raises(UsageError):
        env.step(np.zeros(3))


def test_reward_terms_shape():
    arena = reduced_arena()
    prev = level_uav([0, 0, 500])
    cur = step_dynamics(prev, np.array([0, 0, 1.0]), 1.0)
    terms = reward_terms(prev, cur, np.array([5000.0, 0, 500.0]), np.full(32, arena.radar_range),
                         arena, arena.v_max * arena.dt, 1.5 * math.pi)
    assert terms.shape == (5,)
    assert terms[0] == pytest.approx(70.0 / 103.0)
    assert terms[1] == pytest.approx(0.0)
    assert terms[3] == 1.0


def test_toy_env_basics():
    env = ToyEnv(seed=0)
    obs = env.reset()
    assert obs.shape == (12,)
    assert np.linalg.norm(env.goal - env.pos) >= env.cfg.min_goal_distance
    env.set_state([0.5, 0.5], [0, 0], [0.52, 0.5], np.zeros((0, 2)), np.zeros(0))
    assert env.step([1.0, 0.0]).terminal is Terminal.SUCCESS
    env.set_state([0.5, 0.5], [0, 0], [0.9, 0.9], [[0.53, 0.5]], [0.02])
    assert env.step([1.0, 0.0]).terminal is Terminal.COLLISION


def test_toy_timeout_bootstraps():
    env = ToyEnv(seed=0)
    env.max_steps = 3
    env.reset()
    outs = [env.step([0.0, 0.0]) for _ in range(3)]
    assert outs[-1].terminal is Terminal.TIMEOUT and not outs[-1].bootstrap_cut


def test_scenario_files(tmp_path):
    env = parse_scenario("env = uav\narena_scale = 0.1\nn_obstacles = 5\n")
    assert env.arena.n_obstacles == 5 and env.arena.extents == (12_000.0, 9_000.0, 1_000.0)
    with pytest.raises(ConfigurationError):
        parse_scenario("env = toy\nbogus = 1\n")
    p = tmp_path / "s.txt"
    p.write_text("env = toy\nmax_steps = 50  # shorter\n")
    assert load_scenario(p).cfg.max_steps == 50
