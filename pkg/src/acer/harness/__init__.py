from .config import RunConfig, load_config, parse_config
from .metrics import EpisodeRecord, RunSummary, read_episodes_csv, summarize, trailing_hit_rates
from .train import (Trainer, TrainResult, beta_schedule, diagnose_priorities, evaluate,
                    random_policy_hit_rate, sweep, train)

__all__ = [
    "EpisodeRecord", "RunConfig", "RunSummary", "TrainResult", "Trainer", "beta_schedule",
    "diagnose_priorities", "evaluate", "load_config", "parse_config", "random_policy_hit_rate",
    "read_episodes_csv", "summarize", "sweep", "train", "trailing_hit_rates",
]
