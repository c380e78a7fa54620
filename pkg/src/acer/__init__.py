"""Prioritized replay with curriculum priorities, stochastic low-priority eviction and
background priority refresh, on a numpy TD3 agent."""
from ._accel import backend
from .curriculum import CurriculumConfig, CurriculumState
from .replay import ReplayBuffer, ReplayMode
from .sumtree import DoubleSumTree
from .td3 import Td3Agent, Td3Config

__version__ = "0.1.0"
__all__ = ["CurriculumConfig", "CurriculumState", "DoubleSumTree", "ReplayBuffer", "ReplayMode",
           "Td3Agent", "Td3Config", "backend"]
