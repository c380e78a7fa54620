from .base import ConfigurationError, Env, StepOutcome, Terminal, UsageError
from .scenario import load_scenario, make_env, parse_scenario
from .toy import ToyConfig, ToyEnv
from .uav import ArenaConfig, RewardConfig, UavEnv, UavPhysical, reduced_arena

__all__ = [
    "ArenaConfig", "ConfigurationError", "Env", "RewardConfig", "StepOutcome", "Terminal",
    "ToyConfig", "ToyEnv", "UavEnv", "UavPhysical", "UsageError", "load_scenario", "make_env",
    "parse_scenario", "reduced_arena",
]
