"""Compact PPO trainer (clipped surrogate, GAE) used by the training scripts.

The package mirror carries no installable RL framework, so the adapter
ships a small standard PPO on torch: separate tanh policy/value MLPs,
generalized advantage estimation with timeout bootstrapping, clipped
objective with the usual defaults (lr 3e-4, minibatch 64, 10 epochs,
gamma 0.99, lambda 0.95, clip 0.2). The remote environment follows the
standard five-tuple contract, so a full framework can be dropped in where
one is installed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import torch
from torch import nn

from .client import RemoteEnv

__all__ = ["PPOConfig", "PolicyValueNet", "train_ppo", "evaluate_policy",
           "random_baseline"]


@dataclass
class PPOConfig:
    total_steps: int = 100_000
    n_steps: int = 6144          # transitions per policy update
    minibatch: int = 64
    epochs: int = 10
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip: float = 0.2
    lr: float = 3e-4
    vf_coef: float = 0.5
    ent_coef: float = 0.0
    max_grad_norm: float = 0.5
    hidden: int = 64


def _mlp(in_dim: int, hidden: int, out_dim: int) -> nn.Sequential:
    layers = nn.Sequential(
        nn.Linear(in_dim, hidden), nn.Tanh(),
        nn.Linear(hidden, hidden), nn.Tanh(),
        nn.Linear(hidden, out_dim))
    for i, layer in enumerate(layers):
        if isinstance(layer, nn.Linear):
            gain = 0.01 if i == len(layers) - 1 else np.sqrt(2)
            nn.init.orthogonal_(layer.weight, gain=gain)
            nn.init.zeros_(layer.bias)
    return layers


class PolicyValueNet(nn.Module):
    """Categorical policy and value function with fixed input scaling."""

    def __init__(self, obs_dim: int, n_actions: int, obs_scale: np.ndarray,
                 hidden: int = 64):
        super().__init__()
        self.pi = _mlp(obs_dim, hidden, n_actions)
        self.vf = _mlp(obs_dim, hidden, 1)
        self.register_buffer("obs_scale", torch.as_tensor(obs_scale, dtype=torch.float32))

    def forward(self, obs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        scaled = obs * self.obs_scale
        return self.pi(scaled), self.vf(scaled).squeeze(-1)

    @torch.no_grad()
    def act(self, obs: np.ndarray, deterministic: bool = False) -> tuple[int, float, float]:
        logits, value = self(torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0))
        dist = torch.distributions.Categorical(logits=logits)
        action = logits.argmax(dim=-1) if deterministic else dist.sample()
        return int(action.item()), float(dist.log_prob(action).item()), float(value.item())

    def action_fn(self, deterministic: bool = True) -> Callable[[np.ndarray], int]:
        return lambda obs: self.act(obs, deterministic=deterministic)[0]


def train_ppo(env: RemoteEnv, obs_scale: np.ndarray, cfg: PPOConfig,
              seed: int) -> tuple[PolicyValueNet, list[float]]:
    """Train on one remote environment; returns the net and the cumulative
    rewards of episodes completed during training."""
    torch.manual_seed(seed)
    torch.set_num_threads(1)
    net = PolicyValueNet(env.obs_len, env.action_count, obs_scale, cfg.hidden)
    optim = torch.optim.Adam(net.parameters(), lr=cfg.lr)

    episode = 0

    def next_episode_seed() -> int:
        nonlocal episode
        episode += 1
        return seed * 1_000_000 + episode

    obs = env.reset(next_episode_seed())
    episode_return = 0.0
    history: list[float] = []

    updates = max(1, cfg.total_steps // cfg.n_steps)
    for _ in range(updates):
        obs_buf = np.empty((cfg.n_steps, env.obs_len), dtype=np.float32)
        act_buf = np.empty(cfg.n_steps, dtype=np.int64)
        logp_buf = np.empty(cfg.n_steps, dtype=np.float32)
        rew_buf = np.empty(cfg.n_steps, dtype=np.float32)
        val_buf = np.empty(cfg.n_steps, dtype=np.float32)
        cont_buf = np.empty(cfg.n_steps, dtype=np.float32)  # 1 unless episode ended

        for t in range(cfg.n_steps):
            action, logp, value = net.act(obs)
            next_obs, reward, terminated, truncated, _ = env.step(action)
            episode_return += reward
            obs_buf[t] = obs
            act_buf[t] = action
            logp_buf[t] = logp
            val_buf[t] = value
            cont_buf[t] = 0.0 if (terminated or truncated) else 1.0
            if truncated and not terminated:
                # timeout: bootstrap the cut-off return
                with torch.no_grad():
                    _, v_next = net(torch.as_tensor(next_obs, dtype=torch.float32).unsqueeze(0))
                reward += cfg.gamma * float(v_next.item())
            rew_buf[t] = reward
            if terminated or truncated:
                history.append(episode_return)
                episode_return = 0.0
                obs = env.reset(next_episode_seed())
            else:
                obs = next_obs

        with torch.no_grad():
            _, last_value = net(torch.as_tensor(obs, dtype=torch.float32).unsqueeze(0))
        advantages = np.zeros(cfg.n_steps, dtype=np.float32)
        gae = 0.0
        next_value = float(last_value.item())
        for t in reversed(range(cfg.n_steps)):
            delta = rew_buf[t] + cfg.gamma * next_value * cont_buf[t] - val_buf[t]
            gae = delta + cfg.gamma * cfg.gae_lambda * cont_buf[t] * gae
            advantages[t] = gae
            next_value = val_buf[t]
        returns = advantages + val_buf

        obs_t = torch.as_tensor(obs_buf)
        act_t = torch.as_tensor(act_buf)
        old_logp_t = torch.as_tensor(logp_buf)
        adv_t = torch.as_tensor(advantages)
        ret_t = torch.as_tensor(returns)
        adv_t = (adv_t - adv_t.mean()) / (adv_t.std() + 1e-8)

        idx = np.arange(cfg.n_steps)
        gen = np.random.default_rng(seed * 97 + len(history))
        for _ in range(cfg.epochs):
            gen.shuffle(idx)
            for start in range(0, cfg.n_steps, cfg.minibatch):
                mb = torch.as_tensor(idx[start:start + cfg.minibatch])
                logits, values = net(obs_t[mb])
                dist = torch.distributions.Categorical(logits=logits)
                logp = dist.log_prob(act_t[mb])
                ratio = torch.exp(logp - old_logp_t[mb])
                adv = adv_t[mb]
                surrogate = torch.min(
                    ratio * adv,
                    torch.clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip) * adv)
                policy_loss = -surrogate.mean()
                value_loss = ((values - ret_t[mb]) ** 2).mean()
                entropy = dist.entropy().mean()
                loss = policy_loss + cfg.vf_coef * value_loss - cfg.ent_coef * entropy
                optim.zero_grad()
                loss.backward()
                nn.utils.clip_grad_norm_(net.parameters(), cfg.max_grad_norm)
                optim.step()

    return net, history


def evaluate_policy(env: RemoteEnv, action_fn: Callable[[np.ndarray], int],
                    seeds: Sequence[int]) -> np.ndarray:
    """Cumulative reward of one episode per seed."""
    returns = []
    for seed in seeds:
        obs = env.reset(seed)
        total = 0.0
        while True:
            obs, reward, terminated, truncated, _ = env.step(action_fn(obs))
            total += reward
            if terminated or truncated:
                break
        returns.append(total)
    return np.asarray(returns)


def random_baseline(env: RemoteEnv, seeds: Sequence[int]) -> np.ndarray:
    """Uniform-random policy over the env's action set, seeded per episode."""
    returns = []
    for seed in seeds:
        rng = np.random.default_rng((seed, 1))
        obs = env.reset(seed)
        total = 0.0
        while True:
            obs, reward, terminated, truncated, _ = env.step(
                int(rng.integers(0, env.action_count)))
            total += reward
            if terminated or truncated:
                break
        returns.append(total)
    return np.asarray(returns)
