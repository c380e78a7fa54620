"""Scenario files: ``key = value`` lines selecting and configuring an environment.

``env`` picks ``uav`` or ``toy``; every other key must be a field of the
matching config dataclasses (ArenaConfig/RewardConfig for ``uav``, ToyConfig
for ``toy``).  Tuple-valued fields take comma-separated values.  ``#`` starts
a comment.  ``arena_scale`` (uav only) shrinks every length of the default
arena before explicit keys are applied.
"""
from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any

from .base import ConfigurationError, Env
from .toy import ToyConfig, ToyEnv
from .uav import ArenaConfig, RewardConfig, UavEnv, reduced_arena


def parse_kv(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in out:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def coerce(value: str, default: Any) -> Any:
    """Convert ``value`` to the type of ``default``."""
    if isinstance(default, bool):
        if value.lower() in ("1", "true", "yes", "on"):
            return True
        if value.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"not a boolean: {value!r}")
    if isinstance(default, tuple):
        items = [v.strip() for v in value.split(",") if v.strip()]
        kind = type(default[0]) if default else float
        return tuple(kind(v) for v in items)
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float) or default is None:
        return None if value.lower() == "none" else float(value)
    return value


def _apply(cls, base, items: dict[str, str]):
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {k: coerce(v, getattr(base, k)) for k, v in items.items() if k in names}
    return dataclasses.replace(base, **kwargs), set(kwargs)


def parse_scenario(text: str, seed: int | None = None) -> Env:
    items = parse_kv(text)
    kind = items.pop("env", "uav")
    if kind == "toy":
        cfg, used = _apply(ToyConfig, ToyConfig(), items)
        unknown = set(items) - used
        env: Env = ToyEnv(cfg, seed)
    elif kind == "uav":
        scale = float(items.pop("arena_scale", 1.0))
        arena = reduced_arena(scale) if scale != 1.0 else ArenaConfig()
        arena, used_a = _apply(ArenaConfig, arena, items)
        rewards, used_r = _apply(RewardConfig, RewardConfig(), items)
        unknown = set(items) - used_a - used_r
        env = UavEnv(arena, rewards, seed)
    else:
        raise ConfigurationError(f"unknown env {kind!r}")
    if unknown:
        raise ConfigurationError(f"unknown scenario keys: {sorted(unknown)}")
    return env


def load_scenario(path, seed: int | None = None) -> Env:
    return parse_scenario(Path(path).read_text(), seed)


def make_env(kind: str, scenario: str | None = None, seed: int | None = None) -> Env:
    if scenario:
        env = load_scenario(scenario, seed)
        if env.name != kind:
            raise ConfigurationError(f"scenario defines env {env.name!r}, run asks for {kind!r}")
        return env
    if kind == "toy":
        return ToyEnv(seed=seed)
    if kind == "uav":
        return UavEnv(seed=seed)
    raise ConfigurationError(f"unknown env {kind!r}")
