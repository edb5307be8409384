"""Deterministic-by-seed simulator of a stochastic container-management
resource-allocation MDP: scarce processing units, random-walk container
filling, Gaussian emptying rewards. Ships baseline policies, a rollout and
analysis toolkit, and a JSON-lines environment server for external agents.
"""

from .config import (ConfigError, ContainerParams, EnvConfig, Optimum,
                     default_config, fingerprint, load_config, save_config,
                     validate_reward_landscape, with_max_episode_steps)
from .dynamics import decay_timer, processing_time, step_volume
from .env import DO_NOTHING, ContainerEnv, EpisodeOver, State, StepResult, observe
from .policies import make_policy, rule_based_action, uniform_random_action
from .reward import emptying_reward, reward
from .rollout import (Ecdf, EmptyingEvent, EpisodeStats, StepRecord, Summary,
                      Trajectory, ecdf, emptying_events, export_trace,
                      read_trace, run_episode, run_episodes, summarize)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ContainerParams", "EnvConfig", "Optimum",
    "default_config", "fingerprint", "load_config", "save_config",
    "validate_reward_landscape", "with_max_episode_steps",
    "decay_timer", "processing_time", "step_volume",
    "DO_NOTHING", "ContainerEnv", "EpisodeOver", "State", "StepResult", "observe",
    "make_policy", "rule_based_action", "uniform_random_action",
    "emptying_reward", "reward",
    "Ecdf", "EmptyingEvent", "EpisodeStats", "StepRecord", "Summary", "Trajectory",
    "ecdf", "emptying_events", "export_trace", "read_trace",
    "run_episode", "run_episodes", "summarize",
]
