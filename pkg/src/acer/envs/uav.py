"""3D UAV motion-control task with moving hemispherical obstacles.

Units are SI (m, s).  The arena spans ``[0, X] x [0, Y] x [0, Z]``; target and
obstacles are hemispheres standing on the ground plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .base import ConfigurationError, Env, StepOutcome, Terminal, UsageError
from .radar import body_ray_directions, cast_rays, rotate_body_to_world


@dataclass(frozen=True)
class ArenaConfig:
    extents: tuple[float, float, float] = (120_000.0, 90_000.0, 10_000.0)
    target_radius: float = 3_000.0
    n_obstacles: int = 20
    obstacle_speed: float = 5.0
    obstacle_radius_min: float = 5_000.0
    obstacle_radius_max: float = 10_000.0
    min_start_distance: float = 50_000.0
    dt: float = 1.0
    radar_azimuths: tuple[float, ...] = tuple(np.linspace(-60.0, 60.0, 8))
    radar_elevations: tuple[float, ...] = (-30.0, -15.0, 0.0, 10.0)
    radar_range: float = 5_000.0
    gravity: float = 9.8
    v_max: float = 103.0
    v_min: float = 30.0
    n_max: float = 15.0
    cruise_speed: float = 70.0
    max_steps: int = 3000
    placement_retries: int = 200

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(float(e) for e in self.extents))
        object.__setattr__(self, "radar_azimuths", tuple(float(a) for a in self.radar_azimuths))
        object.__setattr__(self, "radar_elevations", tuple(float(a) for a in self.radar_elevations))
        if min(self.extents) <= 0:
            raise ValueError("extents must be positive")
        if self.min_start_distance >= math.dist((0, 0, 0), self.extents):
            raise ValueError("min_start_distance exceeds the arena diagonal")
        if not 0 < self.obstacle_radius_min <= self.obstacle_radius_max:
            raise ValueError("bad obstacle radius range")
        if not 0 < self.v_min < self.v_max:
            raise ValueError("need 0 < v_min < v_max")

    @property
    def n_rays(self) -> int:
        return len(self.radar_azimuths) * len(self.radar_elevations)


@dataclass(frozen=True)
class RewardConfig:
    r_success: float = 100.0
    r_failure: float = -200.0
    lambdas: tuple[float, float, float, float, float] = (20.0, 20.0, 10.0, 40.0, 10.0)
    k_p: float | None = None
    k_a: float = 1.5 * math.pi

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        if len(self.lambdas) != 5 or min(self.lambdas) < 0:
            raise ValueError("need five non-negative reward weights")
        if self.k_p is not None and self.k_p <= 0 or self.k_a <= 0:
            raise ValueError("normalizers must be positive")


@dataclass
class UavPhysical:
    position: np.ndarray
    velocity: np.ndarray
    pitch: float = 0.0
    yaw: float = 0.0

    def copy(self) -> "UavPhysical":
        return UavPhysical(self.position.copy(), self.velocity.copy(), self.pitch, self.yaw)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))


@dataclass
class Obstacle:
    center: np.ndarray
    radius: float
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))


def attitude(velocity) -> tuple[float, float]:
    """(pitch, yaw) of the velocity vector; yaw uses the quadrant-aware arctangent."""
    vx, vy, vz = (float(v) for v in velocity)
    return math.atan2(vz, math.hypot(vx, vy)), math.atan2(vy, vx)


def step_dynamics(uav: UavPhysical, load_factor, dt: float, g: float = 9.8,
                  speed_band: tuple[float, float] | None = (30.0, 103.0)) -> UavPhysical:
    """Semi-implicit Euler step driven by the load factor.

    Acceleration is ``n * g + (0, 0, -g)``; the new velocity is rescaled into
    ``speed_band`` (keeping the previous heading if it collapses to zero) and
    the position advances with the new velocity.
    """
    n = np.asarray(load_factor, dtype=np.float64)
    accel = n * g
    accel[2] -= g
    v = uav.velocity + accel * dt
    if speed_band is not None:
        lo, hi = speed_band
        speed = float(np.linalg.norm(v))
        if speed > hi:
            v = v * (hi / speed)
        elif speed < lo:
            if speed > 0.0:
                v = v * (lo / speed)
            else:
                prev = uav.velocity
                norm = float(np.linalg.norm(prev))
                v = prev * (lo / norm) if norm > 0 else np.array([lo, 0.0, 0.0])
    p = uav.position + v * dt
    pitch, yaw = attitude(v)
    return UavPhysical(p, v, pitch, yaw)


def angles_to_target(uav: UavPhysical, target) -> tuple[float, float]:
    """Absolute yaw and pitch differences between the heading and the line of sight."""
    los = np.asarray(target, dtype=np.float64) - uav.position
    t_pitch, t_yaw = attitude(los)
    dyaw = abs((t_yaw - uav.yaw + math.pi) % (2.0 * math.pi) - math.pi)
    return dyaw, abs(t_pitch - uav.pitch)


def reward_terms(prev: UavPhysical, cur: UavPhysical, target, radar, arena: ArenaConfig,
                 k_p: float, k_a: float) -> np.ndarray:
    """The five shaping terms (position, angle, height, obstacle, speed)."""
    d_pre = float(np.linalg.norm(np.asarray(target) - prev.position))
    d_cur = float(np.linalg.norm(np.asarray(target) - cur.position))
    dyaw, dpitch = angles_to_target(cur, target)
    return np.array([
        (d_pre - d_cur) / k_p,
        -(dyaw + dpitch) / k_a,
        1.0 - cur.position[2] / arena.extents[2],
        float(np.mean(np.asarray(radar) / arena.radar_range)),
        cur.speed / arena.v_max,
    ])


def reward(prev: UavPhysical, cur: UavPhysical, target, radar, outcome: Terminal,
           arena: ArenaConfig, cfg: RewardConfig = RewardConfig()) -> float:
    if outcome is Terminal.SUCCESS:
        return cfg.r_success
    if outcome in (Terminal.COLLISION, Terminal.OUT_OF_RANGE):
        return cfg.r_failure
    k_p = cfg.k_p if cfg.k_p is not None else arena.v_max * arena.dt
    terms = reward_terms(prev, cur, target, radar, arena, k_p, cfg.k_a)
    return float(np.dot(cfg.lambdas, terms))


class UavEnv(Env):
    name = "uav"

    def __init__(self, arena: ArenaConfig = ArenaConfig(), rewards: RewardConfig = RewardConfig(),
                 seed: int | None = None):
        self.arena = arena
        self.rewards = rewards
        self.rng = np.random.default_rng(seed)
        self.body_dirs = body_ray_directions(arena.radar_azimuths, arena.radar_elevations)
        self.obs_dim = arena.n_rays + 6
        self.action_dim = 3
        self.max_steps = arena.max_steps
        self.uav: UavPhysical | None = None
        self.target = np.zeros(3)
        self.obstacles: list[Obstacle] = []
        self.t = 0
        self.done = True
        self.last_radar = np.full(arena.n_rays, arena.radar_range)

    # geometry ---------------------------------------------------------------

    def _centers_radii(self):
        if not self.obstacles:
            return np.zeros((0, 2)), np.zeros(0)
        return (np.array([o.center for o in self.obstacles]),
                np.array([o.radius for o in self.obstacles]))

    def radar_scan(self, uav: UavPhysical | None = None) -> np.ndarray:
        uav = self.uav if uav is None else uav
        dirs = rotate_body_to_world(self.body_dirs, uav.yaw, uav.pitch)
        centers, radii = self._centers_radii()
        return cast_rays(uav.position, dirs, centers, radii, self.arena.radar_range)

    def in_obstacle(self, p) -> bool:
        return any(p[2] >= 0 and math.dist((p[0], p[1], p[2]), (o.center[0], o.center[1], 0.0)) < o.radius
                   for o in self.obstacles)

    def in_target(self, p) -> bool:
        return p[2] >= 0 and float(np.linalg.norm(p - self.target)) <= self.arena.target_radius

    def out_of_range(self, p) -> bool:
        x, y, z = self.arena.extents
        return not (0.0 <= p[0] <= x and 0.0 <= p[1] <= y and 0.0 < p[2] <= z)

    # episode --------------------------------------------------------------

    def seed(self, seed: int | None) -> None:
        self.rng = np.random.default_rng(seed)

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self.seed(seed)
        a = self.arena
        x, y, z = a.extents
        rng = self.rng
        for _ in range(a.placement_retries):
            start = np.array([rng.uniform(0, x), rng.uniform(0, y), z])
            target = np.array([rng.uniform(0, x), rng.uniform(0, y), 0.0])
            if np.linalg.norm(start - target) > a.min_start_distance:
                break
        else:
            raise ConfigurationError("could not place UAV and target far enough apart")
        obstacles = []
        for _ in range(a.n_obstacles):
            for _ in range(a.placement_retries):
                c = np.array([rng.uniform(0, x), rng.uniform(0, y)])
                r = rng.uniform(a.obstacle_radius_min, a.obstacle_radius_max)
                clear_start = math.dist((c[0], c[1], 0.0), start) > r + a.target_radius
                clear_target = math.dist(c, target[:2]) > r + a.target_radius
                if clear_start and clear_target:
                    break
            else:
                raise ConfigurationError("could not place obstacles clear of start and target")
            heading = rng.uniform(-math.pi, math.pi)
            obstacles.append(Obstacle(c, r, a.obstacle_speed * np.array([math.cos(heading), math.sin(heading)])))
        heading = rng.uniform(-math.pi, math.pi)
        v0 = a.cruise_speed * np.array([math.cos(heading), math.sin(heading), 0.0])
        pitch, yaw = attitude(v0)
        self.uav = UavPhysical(start, v0, pitch, yaw)
        self.target = target
        self.obstacles = obstacles
        self.t = 0
        self.done = False
        self.last_radar = self.radar_scan()
        return self.observe()

    def set_state(self, uav: UavPhysical, target, obstacles: list[Obstacle]) -> np.ndarray:
        """Place the scene explicitly (tests, scenario replays)."""
        self.uav = uav.copy()
        self.target = np.asarray(target, dtype=np.float64)
        self.obstacles = obstacles
        self.t = 0
        self.done = False
        self.last_radar = self.radar_scan()
        return self.observe()

    def observe(self) -> np.ndarray:
        a = self.arena
        u = self.uav
        rel = (self.target - u.position) / np.asarray(a.extents)
        return np.concatenate([
            rel,
            [u.yaw / math.pi, u.pitch / math.pi, u.speed / a.v_max],
            self.last_radar / a.radar_range,
        ])

    def _move_obstacles(self) -> None:
        x, y, _ = self.arena.extents
        for o in self.obstacles:
            o.center = o.center + o.velocity * self.arena.dt
            for k, hi in ((0, x), (1, y)):
                if o.center[k] < 0.0:
                    o.center[k] = -o.center[k]
                    o.velocity[k] = -o.velocity[k]
                elif o.center[k] > hi:
                    o.center[k] = 2 * hi - o.center[k]
                    o.velocity[k] = -o.velocity[k]

    def classify(self, p) -> Terminal:
        if self.in_obstacle(p):
            return Terminal.COLLISION
        if self.out_of_range(p):
            return Terminal.OUT_OF_RANGE
        if self.in_target(p):
            return Terminal.SUCCESS
        if self.t >= self.max_steps:
            return Terminal.TIMEOUT
        return Terminal.RUNNING

    def step(self, action) -> StepOutcome:
        if self.done:
            raise UsageError("step() called on a finished episode; call reset()")
        a = self.arena
        n = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0) * a.n_max
        prev = self.uav
        self._move_obstacles()
        self.uav = step_dynamics(prev, n, a.dt, a.gravity, (a.v_min, a.v_max))
        self.t += 1
        outcome = self.classify(self.uav.position)
        self.last_radar = self.radar_scan()
        r = reward(prev, self.uav, self.target, self.last_radar, outcome, a, self.rewards)
        self.done = outcome is not Terminal.RUNNING
        return StepOutcome(self.observe(), r, outcome)

    def trajectory_row(self, r: float, outcome: Terminal) -> tuple:
        u = self.uav
        return (self.t, *map(float, u.position), u.yaw, u.pitch, u.speed, r, outcome.value)


def reduced_arena(scale: float = 0.1, **overrides) -> ArenaConfig:
    """The full arena with every length multiplied by ``scale`` (speeds unchanged)."""
    base = ArenaConfig()
    cfg = replace(
        base,
        extents=tuple(e * scale for e in base.extents),
        target_radius=base.target_radius * scale,
        obstacle_radius_min=base.obstacle_radius_min * scale,
        obstacle_radius_max=base.obstacle_radius_max * scale,
        min_start_distance=base.min_start_distance * scale,
        radar_range=base.radar_range * scale,
    )
    return replace(cfg, **overrides)
