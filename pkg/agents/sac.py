# coding=utf-8

import typing as t

import numpy as np

from tensor import Module, Tensor, as_tensor, minimum, no_grad, square

from .distributions import TanhGaussian
from .networks import SACActorCritic


class SacLosses(t.NamedTuple):
    actor_loss: Tensor
    critic_loss: Tensor
    alpha_loss: Tensor
    log_prob: Tensor


def soft_value(q_min: t.Union[Tensor, np.ndarray], logp: t.Union[Tensor, np.ndarray], alpha: float) -> Tensor:
    """
    Entropy-regularized state value Q - alpha * log pi
    """

    return as_tensor(q_min) - as_tensor(logp) * alpha


def td_target(rewards: np.ndarray, dones: np.ndarray, next_values: np.ndarray, gamma: float) -> np.ndarray:
    """
    r + gamma * (1 - done) * V(s')
    """

    rewards = np.asarray(rewards, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)

    return rewards + gamma * (1.0 - dones) * np.asarray(next_values, dtype=np.float64)


def critic_target(
        nets: SACActorCritic,
        next_obs: np.ndarray,
        rewards: np.ndarray,
        dones: np.ndarray,
        noise: np.ndarray,
        gamma: float
) -> np.ndarray:
    """
    Soft TD target from the target encoder and the smaller target Q (not recorded)
    """

    with no_grad():
        embedding = nets.target_embedding(next_obs)
        action, logp = nets.policy(embedding).rsample_with_log_prob(noise)

        q_min = minimum(*nets.q_values(embedding, action, target=True))
        next_values = soft_value(q_min, logp, nets.alpha)

    return td_target(rewards, dones, next_values.data, gamma)


def sac_critic_loss(nets: SACActorCritic, embedding: Tensor, actions: np.ndarray, targets: np.ndarray) -> Tensor:
    q_1, q_2 = nets.q_values(embedding, actions)
    return square(q_1 - targets).mean() + square(q_2 - targets).mean()


def sac_actor_loss(
        nets: SACActorCritic,
        embedding: Tensor,
        dist: TanhGaussian,
        noise: np.ndarray
) -> t.Tuple[Tensor, Tensor]:
    """
    mean(alpha * log pi(a|s) - min Q(s, a)) with reparameterized actions

    Returns:
        t.Tuple[Tensor, Tensor]: loss, log probabilities of the sampled actions
    """

    action, logp = dist.rsample_with_log_prob(noise)
    q_min = minimum(*nets.q_values(embedding, action))

    return (logp * nets.alpha - q_min).mean(), logp


def sac_alpha_loss(nets: SACActorCritic, logp: Tensor) -> Tensor:
    """
    Temperature loss driving the policy entropy toward -|A|
    """

    return -(nets.log_alpha * (logp.detach().data + nets.target_entropy)).mean()


def sac_losses(
        batch: t.Any,
        nets: SACActorCritic,
        gamma: float,
        noise: np.ndarray,
        noise_next: np.ndarray
) -> SacLosses:
    """
    Actor, critic and temperature losses on the clean path of one replay batch

    Args:
        batch (t.Any): Replay batch (obs, actions, rewards, next_obs, dones)
        nets (SACActorCritic): Networks
        gamma (float): Discount
        noise (np.ndarray): Standard normal draws for the actor sample
        noise_next (np.ndarray): Standard normal draws for the next-state sample
    """

    targets = critic_target(nets, batch.next_obs, batch.rewards, batch.dones, noise_next, gamma)

    dist, embedding = nets.heads_from_branch(nets.encode_to_branch(batch.obs))
    actor_loss, logp = sac_actor_loss(nets, embedding, dist, noise)

    return SacLosses(
        actor_loss=actor_loss,
        critic_loss=sac_critic_loss(nets, embedding, batch.actions, targets),
        alpha_loss=sac_alpha_loss(nets, logp),
        log_prob=logp
    )


def polyak_update(target: Module, online: Module, tau: float) -> None:
    """
    target <- (1 - tau) * target + tau * online
    """

    target_params = target.named_parameters()

    for name, param in online.named_parameters().items():
        target_params[name].data = (1.0 - tau) * target_params[name].data + tau * param.data


__all__ = (
    "SacLosses",
    "soft_value",
    "td_target",
    "critic_target",
    "sac_critic_loss",
    "sac_actor_loss",
    "sac_alpha_loss",
    "sac_losses",
    "polyak_update"
)
