"""Adapter exposing the container-sim wire protocol through the standard
RL five-tuple environment contract, with PPO training/evaluation scripts."""

from .client import (BadActionError, EpisodeOverError, RemoteEnv,
                     RemoteEnvError, ServerError, make_gymnasium_env,
                     observation_scale, register_gymnasium_env,
                     write_config_override)
from .ppo import (PPOConfig, PolicyValueNet, evaluate_policy, random_baseline,
                  train_ppo)
from .train import load_policy, train_and_evaluate

__version__ = "0.1.0"

__all__ = [
    "RemoteEnv", "RemoteEnvError", "ServerError", "BadActionError",
    "EpisodeOverError", "make_gymnasium_env", "register_gymnasium_env",
    "observation_scale", "write_config_override",
    "PPOConfig", "PolicyValueNet", "evaluate_policy", "random_baseline",
    "train_ppo", "train_and_evaluate", "load_policy",
]
