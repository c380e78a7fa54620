"""Curriculum priority function and the curriculum-factor schedule."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CurriculumConfig:
    c_init: float = 10.0
    c_incr: float = 1.0
    update_period: int = 100
    k1: float = 0.01
    k2: float = 0.005

    def __post_init__(self):
        if not self.c_init > 0:
            raise ValueError("c_init must be positive")
        if self.update_period < 1:
            raise ValueError("update_period must be >= 1")
        if not self.k1 > self.k2 > 0:
            raise ValueError("need k1 > k2 > 0")


@dataclass(frozen=True)
class CurriculumState:
    c: float
    episodes_seen: int = 0

    @classmethod
    def initial(cls, cfg: CurriculumConfig) -> "CurriculumState":
        return cls(cfg.c_init, 0)


def priority(delta, c, k1: float, k2: float):
    """Priority peaked at ``|delta| == c`` with value 1, decaying on both sides.

    ``delta`` and ``c`` broadcast; returns a float for scalar input.
    """
    c = np.asarray(c, dtype=np.float64)
    if not np.all(c > 0):
        raise ValueError("curriculum factor must be positive")
    d = np.abs(np.asarray(delta, dtype=np.float64))
    gap = d - c
    out = np.exp(np.where(gap <= 0.0, k1 * gap, -k2 * gap))
    # exp underflows to 0 for |delta| ~ 1e5 and beyond; keep every experience sampleable
    out = np.maximum(out, np.finfo(np.float64).tiny)
    return float(out) if out.ndim == 0 else out


def advance_episode(state: CurriculumState, cfg: CurriculumConfig) -> CurriculumState:
    seen = state.episodes_seen + 1
    c = state.c + cfg.c_incr if seen % cfg.update_period == 0 else state.c
    return CurriculumState(c, seen)
