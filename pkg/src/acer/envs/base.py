"""Environment interface shared by the UAV task and the toy task."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Terminal(str, Enum):
    RUNNING = "running"
    SUCCESS = "success"
    COLLISION = "collision"
    OUT_OF_RANGE = "out_of_range"
    TIMEOUT = "timeout"


class ConfigurationError(ValueError):
    pass


class UsageError(RuntimeError):
    pass


@dataclass
class StepOutcome:
    observation: np.ndarray
    reward: float
    terminal: Terminal

    @property
    def done(self) -> bool:
        return self.terminal is not Terminal.RUNNING

    @property
    def bootstrap_cut(self) -> bool:
        """True when the transition ends the MDP (timeouts still bootstrap)."""
        return self.terminal in (Terminal.SUCCESS, Terminal.COLLISION, Terminal.OUT_OF_RANGE)


class Env:
    name = "env"
    obs_dim: int
    action_dim: int
    max_steps: int

    def reset(self, seed: int | None = None) -> np.ndarray:
        raise NotImplementedError

    def step(self, action) -> StepOutcome:
        raise NotImplementedError
