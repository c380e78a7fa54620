"""Run configuration and its key-value file format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..curriculum import CurriculumConfig
from ..envs.base import ConfigurationError
from ..envs.scenario import coerce, parse_kv
from ..refresh import RefreshConfig
from ..replay import ReplayMode
from ..td3 import Td3Config


@dataclass(frozen=True)
class RunConfig:
    mode: str = "acer"
    env: str = "toy"
    scenario: str = ""
    episodes: int = 300
    max_steps: int = 0  # 0 keeps the environment's own cap
    warmup_episodes: int = 10
    replay_period: int = 1
    batch_size: int = 64
    temp_pool: int = 5
    buffer_size: int = 50_000
    alpha: float = 0.6
    beta_start: float = 0.4
    beta_end: float = 1.0
    refresh_A: int = 64
    refresh_async: bool = False
    eviction: str = "stochastic"
    c_init: float = 10.0
    c_incr: float = 1.0
    c_update_period: int = 100
    k1: float = 0.01
    k2: float = 0.005
    gamma: float = 0.9
    tau_actor: float = 0.1
    tau_critic: float = 0.2
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    actor_delay: int = 2
    exploration_sigma: float = 0.1
    smoothing_sigma: float = 0.1
    smoothing_clip: float = 0.25
    hidden: tuple[int, ...] = (100, 100)
    td_critic: str = "q1"
    hit_window: int = 500
    stat_window: int = 1500
    checkpoint_every: int = 0
    seed: int = 0
    out_dir: str = ""

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        object.__setattr__(self, "mode", ReplayMode.parse(self.mode).value)
        if self.env not in ("toy", "uav"):
            raise ConfigurationError(f"unknown env {self.env!r}")
        if self.episodes < 1:
            raise ConfigurationError("episodes must be >= 1")
        if not 0 <= self.warmup_episodes < self.episodes:
            raise ConfigurationError("need 0 <= warmup_episodes < episodes")
        if self.replay_period < 1:
            raise ConfigurationError("replay_period must be >= 1")
        if not self.batch_size <= self.buffer_size:
            raise ConfigurationError("need batch_size <= buffer_size")
        if self.mode == "acer" and not 0 <= self.temp_pool < self.batch_size:
            raise ConfigurationError("need 0 <= temp_pool < batch_size")
        if not 0 <= self.beta_start <= 1 or not 0 <= self.beta_end <= 1:
            raise ConfigurationError("beta must lie in [0, 1]")
        if self.eviction not in ("stochastic", "min"):
            raise ConfigurationError("eviction must be 'stochastic' or 'min'")
        if self.hit_window < 1 or self.stat_window < 1:
            raise ConfigurationError("windows must be >= 1")

    @property
    def replay_mode(self) -> ReplayMode:
        return ReplayMode.parse(self.mode)

    def curriculum(self) -> CurriculumConfig:
        return CurriculumConfig(self.c_init, self.c_incr, self.c_update_period, self.k1, self.k2)

    def td3(self) -> Td3Config:
        return Td3Config(
            gamma=self.gamma, tau_actor=self.tau_actor, tau_critic=self.tau_critic,
            actor_lr=self.actor_lr, critic_lr=self.critic_lr, actor_delay=self.actor_delay,
            exploration_sigma=self.exploration_sigma, smoothing_sigma=self.smoothing_sigma,
            smoothing_clip=self.smoothing_clip, hidden=self.hidden, td_critic=self.td_critic,
        )

    def refresh(self) -> RefreshConfig:
        return RefreshConfig(self.refresh_A, self.replay_mode is ReplayMode.ACER and self.refresh_A > 0)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def parse_config(text: str, base: RunConfig | None = None, base_dir: Path | None = None) -> RunConfig:
    base = base or RunConfig()
    items = parse_kv(text)
    names = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(items) - names)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {unknown}")
    try:
        kwargs = {k: coerce(v, getattr(base, k)) for k, v in items.items()}
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    scen = kwargs.get("scenario")
    if scen and base_dir is not None and not Path(scen).is_absolute():
        kwargs["scenario"] = str((base_dir / scen).resolve())
    return dataclasses.replace(base, **kwargs)


def load_config(path, **overrides) -> RunConfig:
    path = Path(path)
    cfg = parse_config(path.read_text(), base_dir=path.parent)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return cfg.replace(**overrides) if overrides else cfg
