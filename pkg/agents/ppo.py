# coding=utf-8

import typing as t

import numpy as np

from errors import NumericError, ShapeError
from tensor import Tensor, as_tensor, clip, exp, minimum, square

from .distributions import PolicyDist


def gae(
        rewards: np.ndarray,
        values: np.ndarray,
        dones: np.ndarray,
        last_values: np.ndarray,
        gamma: float,
        lam: float
) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    Generalized advantage estimation over T x N arrays

    dones[t] marks that the episode ended with the transition taken at step t,
    so no value is bootstrapped across it.

    Args:
        rewards (np.ndarray): T x N rewards
        values (np.ndarray): T x N value estimates at collection time
        dones (np.ndarray): T x N episode-end flags
        last_values (np.ndarray): N values of the states after the last step
        gamma (float): Discount
        lam (float): GAE lambda

    Returns:
        t.Tuple[np.ndarray, np.ndarray]: advantages and value targets (advantages + values)

    Raises:
        ShapeError: If the rollout is empty or shapes disagree
    """

    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)

    if rewards.size == 0:
        raise ShapeError("cannot estimate advantages of an empty rollout")

    if rewards.shape != values.shape or rewards.shape != dones.shape:
        raise ShapeError(f"rewards {rewards.shape}, values {values.shape} and dones {dones.shape} must agree")

    advantages = np.zeros_like(rewards)
    next_values = np.asarray(last_values, dtype=np.float64).reshape(rewards.shape[1:])
    running = np.zeros_like(next_values)

    for step in reversed(range(rewards.shape[0])):
        live = 1.0 - dones[step]
        delta = rewards[step] + gamma * live * next_values - values[step]

        running = delta + gamma * lam * live * running
        advantages[step] = running
        next_values = values[step]

    return advantages, advantages + values


def gae_advantages(rollout: t.Any, gamma: float, lam: float) -> t.Tuple[np.ndarray, np.ndarray]:
    """
    GAE over a complete rollout buffer (rewards, values, dones, last_values)
    """

    if not rollout.full:
        raise ShapeError(f"rollout holds {rollout.position} of {rollout.steps} steps")

    return gae(rollout.rewards, rollout.values, rollout.dones, rollout.last_values, gamma, lam)


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    """
    Zero mean, unit std within one minibatch
    """

    advantages = np.asarray(advantages, dtype=np.float64)
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)


def ppo_actor_loss(
        dist_new: PolicyDist,
        actions: np.ndarray,
        logp_old: np.ndarray,
        advantages: np.ndarray,
        eps: float = 0.2,
        entropy_coef: float = 0.01
) -> Tensor:
    """
    Clipped surrogate loss minus entropy bonus

    -mean(min(r * A, clip(r, 1 - eps, 1 + eps) * A)) - entropy_coef * mean(H)

    Raises:
        NumericError: If any probability ratio is not finite
    """

    ratio = exp(dist_new.log_prob(actions) - np.asarray(logp_old, dtype=np.float64))

    if not np.all(np.isfinite(ratio.data)):
        raise NumericError("PPO probability ratio is not finite")

    advantages = as_tensor(np.asarray(advantages, dtype=np.float64))
    objective = minimum(ratio * advantages, clip(ratio, 1.0 - eps, 1.0 + eps) * advantages)

    loss = -objective.mean()

    if entropy_coef:
        loss = loss - dist_new.entropy().mean() * entropy_coef

    return loss


def ppo_critic_loss(values: Tensor, targets: t.Union[Tensor, np.ndarray]) -> Tensor:
    """
    Mean squared error toward value targets
    """

    values, targets = as_tensor(values), as_tensor(targets)

    if values.shape != targets.shape:
        raise ShapeError(f"values {values.shape} and targets {targets.shape} differ")

    return square(values - targets).mean()


__all__ = (
    "gae",
    "gae_advantages",
    "normalize_advantages",
    "ppo_actor_loss",
    "ppo_critic_loss"
)
