"""2D point-mass reach task: a fast stand-in for the UAV environment.

A point mass accelerates inside the unit square toward a goal disc while
avoiding 1-3 static circular obstacles.  Walls stop the mass but do not end
the episode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import ConfigurationError, Env, StepOutcome, Terminal, UsageError


@dataclass(frozen=True)
class ToyConfig:
    accel: float = 0.02
    drag: float = 0.7
    v_max: float = 0.05
    goal_radius: float = 0.05
    min_goal_distance: float = 0.5
    obstacles: tuple[int, int] = (1, 3)
    obstacle_radius: tuple[float, float] = (0.05, 0.1)
    clearance: float = 0.05
    sensor_range: float = 0.3
    n_sensors: int = 8
    max_steps: int = 100
    progress_weight: float = 1.0
    proximity_weight: float = 0.5
    proximity_margin: float = 0.05
    step_cost: float = 0.05
    r_success: float = 10.0
    r_collision: float = -10.0
    placement_retries: int = 200


def _ray_circle(origin, dirs, centers, radii, max_range):
    best = np.full(dirs.shape[0], max_range)
    for c, r in zip(centers, radii):
        f = origin - c
        b = dirs @ f
        disc = b * b - (f @ f - r * r)
        with np.errstate(invalid="ignore"):
            t = -b - np.sqrt(disc)
        hit = (disc >= 0) & (t >= 0)
        best = np.where(hit & (t < best), t, best)
    # walls of the unit square
    for k in range(2):
        d = dirs[:, k]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(d > 0, (1.0 - origin[k]) / d, np.where(d < 0, -origin[k] / d, np.inf))
        best = np.minimum(best, t)
    return np.maximum(best, 0.0)


class ToyEnv(Env):
    name = "toy"

    def __init__(self, cfg: ToyConfig = ToyConfig(), seed: int | None = None):
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        ang = 2 * np.pi * np.arange(cfg.n_sensors) / cfg.n_sensors
        self.sensor_dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        self.obs_dim = 4 + cfg.n_sensors
        self.action_dim = 2
        self.max_steps = cfg.max_steps
        self.pos = np.zeros(2)
        self.vel = np.zeros(2)
        self.goal = np.zeros(2)
        self.centers = np.zeros((0, 2))
        self.radii = np.zeros(0)
        self.t = 0
        self.done = True

    def seed(self, seed: int | None) -> None:
        self.rng = np.random.default_rng(seed)

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self.seed(seed)
        c, rng = self.cfg, self.rng
        for _ in range(c.placement_retries):
            pos = rng.uniform(0.05, 0.95, 2)
            goal = rng.uniform(0.1, 0.9, 2)
            if np.linalg.norm(goal - pos) >= c.min_goal_distance:
                break
        else:
            raise ConfigurationError("could not place start and goal")
        n_obs = int(rng.integers(c.obstacles[0], c.obstacles[1] + 1))
        centers, radii = [], []
        for _ in range(n_obs):
            for _ in range(c.placement_retries):
                ctr = rng.uniform(0.1, 0.9, 2)
                r = rng.uniform(*c.obstacle_radius)
                if (np.linalg.norm(ctr - pos) > r + c.clearance
                        and np.linalg.norm(ctr - goal) > r + c.goal_radius + c.clearance):
                    break
            else:
                raise ConfigurationError("could not place obstacles")
            centers.append(ctr)
            radii.append(r)
        return self.set_state(pos, np.zeros(2), goal, np.array(centers).reshape(-1, 2), np.array(radii))

    def set_state(self, pos, vel, goal, centers, radii) -> np.ndarray:
        self.pos = np.array(pos, dtype=np.float64)
        self.vel = np.array(vel, dtype=np.float64)
        self.goal = np.array(goal, dtype=np.float64)
        self.centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
        self.radii = np.asarray(radii, dtype=np.float64).reshape(-1)
        self.t = 0
        self.done = False
        return self.observe()

    def ranges(self) -> np.ndarray:
        return _ray_circle(self.pos, self.sensor_dirs, self.centers, self.radii, self.cfg.sensor_range)

    def observe(self) -> np.ndarray:
        return np.concatenate([self.goal - self.pos, self.vel / self.cfg.v_max,
                               self.ranges() / self.cfg.sensor_range])

    def _clearance(self) -> float:
        if not len(self.radii):
            return math.inf
        return float(np.min(np.linalg.norm(self.centers - self.pos, axis=1) - self.radii))

    def step(self, action) -> StepOutcome:
        if self.done:
            raise UsageError("step() called on a finished episode; call reset()")
        c = self.cfg
        a = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
        d_prev = float(np.linalg.norm(self.goal - self.pos))
        v = c.drag * self.vel + a * c.accel
        speed = float(np.linalg.norm(v))
        if speed > c.v_max:
            v *= c.v_max / speed
        p = self.pos + v
        for k in range(2):
            if p[k] < 0.0 or p[k] > 1.0:
                p[k] = min(max(p[k], 0.0), 1.0)
                v[k] = 0.0
        self.pos, self.vel = p, v
        self.t += 1
        d_cur = float(np.linalg.norm(self.goal - p))
        gap = self._clearance()
        if gap < 0.0:
            outcome, r = Terminal.COLLISION, c.r_collision
        elif d_cur <= c.goal_radius:
            outcome, r = Terminal.SUCCESS, c.r_success
        else:
            outcome = Terminal.TIMEOUT if self.t >= self.max_steps else Terminal.RUNNING
            r = c.progress_weight * (d_prev - d_cur) / c.v_max - c.step_cost
            if gap < c.proximity_margin:
                r -= c.proximity_weight * (c.proximity_margin - gap) / c.proximity_margin
        self.done = outcome is not Terminal.RUNNING
        return StepOutcome(self.observe(), float(r), outcome)

    def trajectory_row(self, r: float, outcome: Terminal) -> tuple:
        speed = float(np.linalg.norm(self.vel))
        heading = math.atan2(self.vel[1], self.vel[0])
        return (self.t, float(self.pos[0]), float(self.pos[1]), 0.0, heading, 0.0, speed, r, outcome.value)
