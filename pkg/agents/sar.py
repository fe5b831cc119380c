# coding=utf-8

import logging
import typing as t
from dataclasses import dataclass, fields

import numpy as np

from errors import NumericError, SarError
from style import PerturbGenerator, generate_perturbation, style_mix_batch, style_perturb
from tensor import Adam, Module, Tensor, backward, get_tape, no_grad, square

from .distributions import l_div
from .networks import PPOActorCritic, SACActorCritic
from .ppo import ppo_actor_loss, ppo_critic_loss
from .sac import critic_target, sac_actor_loss, sac_alpha_loss, sac_critic_loss


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SarSettings:
    """
    Coefficients of one update

    Attributes:
        lambda_actor (float): Weight of the divergence in the actor loss
        lambda_gen (float): Weight of the divergence in the generator loss (sign flipped)
        kappa (float): Weight of the value similarity term in the critic loss
        style_mixing (bool): If True, the clean branch is style-mixed within the minibatch
        active (bool): Warm-up indicator (timestep >= warmup_timesteps)
        clip_range (float): PPO ratio clip range
        entropy_coef (float): PPO entropy bonus weight
        gamma (float): SAC discount
    """

    lambda_actor: float = 0.01
    lambda_gen: float = 0.01
    kappa: float = 0.1
    style_mixing: bool = True
    active: bool = True
    clip_range: float = 0.2
    entropy_coef: float = 0.01
    gamma: float = 0.99

    @classmethod
    def from_config(cls, cfg: t.Any, timestep: int) -> "SarSettings":
        """
        Settings of a resolved RunConfig at a given timestep
        """

        return cls(
            lambda_actor=cfg.lambda_actor,
            lambda_gen=cfg.lambda_gen,
            kappa=cfg.kappa,
            style_mixing=cfg.style_mixing,
            active=timestep >= cfg.warmup_timesteps,
            clip_range=cfg.clip_range,
            entropy_coef=cfg.entropy_coef,
            gamma=cfg.gamma
        )

    @property
    def adversarial(self) -> bool:
        """
        Whether the perturbed branch contributes to any loss
        """

        return self.active and (self.lambda_actor > 0 or self.lambda_gen > 0 or self.kappa > 0)


@dataclass
class SarLossBundle:
    actor_loss: Tensor
    critic_loss: Tensor
    gen_loss: Tensor
    l_div: Tensor
    g_critic: Tensor
    entropy_bonus: Tensor
    alpha_loss: t.Optional[Tensor] = None

    def scalars(self) -> t.Dict[str, float]:
        return {
            field.name: getattr(self, field.name).item()
            for field in fields(self)
            if getattr(self, field.name) is not None
        }

    def check_finite(self) -> None:
        """
        Raises:
            NumericError: If any loss is NaN or infinite
        """

        bad = [name for name, value in self.scalars().items() if not np.isfinite(value)]

        if bad:
            error = NumericError(f"non-finite loss values: {', '.join(bad)}")
            error.losses = self.scalars()
            raise error


def _zero() -> Tensor:
    return Tensor(0.0)


def _clean_branch(z: Tensor, settings: SarSettings, perm: t.Optional[np.ndarray]) -> Tensor:
    if not settings.style_mixing:
        return z

    if perm is None:
        raise SarError("style mixing requires a minibatch permutation")

    return style_mix_batch(z, perm=perm)


def _perturbed(z: Tensor, gen: t.Optional[PerturbGenerator]) -> Tensor:
    if gen is None:
        raise SarError("adversarial terms requested but no perturbation generator was initialized")

    return style_perturb(z, generate_perturbation(gen, z))


def _ppo_losses(
        model: PPOActorCritic,
        batch: t.Any,
        gen: t.Optional[PerturbGenerator],
        settings: SarSettings,
        perm: t.Optional[np.ndarray]
) -> SarLossBundle:
    z = model.encode_to_branch(batch.obs)
    dist, values = model.heads_from_branch(_clean_branch(z, settings, perm))

    actor_base = ppo_actor_loss(
        dist, batch.actions, batch.logp_old, batch.advantages, settings.clip_range, settings.entropy_coef
    )
    critic_base = ppo_critic_loss(values, batch.targets)

    if settings.adversarial:
        dist_adv, values_adv = model.heads_from_branch(_perturbed(z, gen))
        divergence = l_div(dist, dist_adv)
        g_critic = square(values - values_adv).mean()

    else:
        divergence, g_critic = _zero(), _zero()

    return SarLossBundle(
        actor_loss=actor_base + divergence * settings.lambda_actor,
        critic_loss=critic_base + g_critic * settings.kappa,
        gen_loss=divergence * -settings.lambda_gen,
        l_div=divergence,
        g_critic=g_critic,
        entropy_bonus=dist.entropy().mean()
    )


def _sac_losses(
        model: SACActorCritic,
        batch: t.Any,
        gen: t.Optional[PerturbGenerator],
        settings: SarSettings,
        perm: t.Optional[np.ndarray],
        noise: np.ndarray,
        noise_next: np.ndarray
) -> SarLossBundle:
    targets = critic_target(model, batch.next_obs, batch.rewards, batch.dones, noise_next, settings.gamma)

    z = model.encode_to_branch(batch.obs)
    dist, embedding = model.heads_from_branch(_clean_branch(z, settings, perm))

    critic_base = sac_critic_loss(model, embedding, batch.actions, targets)
    actor_base, logp = sac_actor_loss(model, embedding, dist, noise)

    if settings.adversarial:
        dist_adv, embedding_adv = model.heads_from_branch(_perturbed(z, gen))
        divergence = l_div(dist, dist_adv)
        g_critic = square(model.value_proxy(embedding) - model.value_proxy(embedding_adv)).mean()

    else:
        divergence, g_critic = _zero(), _zero()

    return SarLossBundle(
        actor_loss=actor_base + divergence * settings.lambda_actor,
        critic_loss=critic_base + g_critic * settings.kappa,
        gen_loss=divergence * -settings.lambda_gen,
        l_div=divergence,
        g_critic=g_critic,
        entropy_bonus=-logp.mean(),
        alpha_loss=sac_alpha_loss(model, logp)
    )


def sar_losses(
        model: t.Union[PPOActorCritic, SACActorCritic],
        batch: t.Any,
        gen: t.Optional[PerturbGenerator],
        settings: SarSettings,
        perm: t.Optional[np.ndarray] = None,
        noise: t.Optional[np.ndarray] = None,
        noise_next: t.Optional[np.ndarray] = None
) -> SarLossBundle:
    """
    All losses of one minibatch from a single forward pass

    Clean branch: branch-point features, style-mixed when enabled, through the heads.
    Perturbed branch: the unmixed features re-styled by the generator, through the same heads.

    Args:
        model (t.Union[PPOActorCritic, SACActorCritic]): Actor-critic networks
        batch (t.Any): Rollout minibatch (PPO) or replay batch (SAC)
        gen (t.Optional[PerturbGenerator]): Perturbation generator (needed when adversarial)
        settings (SarSettings): Coefficients and warm-up indicator
        perm (t.Optional[np.ndarray]): Minibatch permutation for style mixing
        noise (t.Optional[np.ndarray]): SAC actor sample noise
        noise_next (t.Optional[np.ndarray]): SAC next-state sample noise

    Returns:
        SarLossBundle: Recorded losses and diagnostics
    """

    if isinstance(model, PPOActorCritic):
        return _ppo_losses(model, batch, gen, settings, perm)

    if noise is None or noise_next is None:
        raise SarError("SAC losses require sample noise for the current and next states")

    return _sac_losses(model, batch, gen, settings, perm, noise, noise_next)


@dataclass
class ParamGroup:
    """
    Parameters stepped by one optimizer on one loss of the bundle
    """

    name: str
    loss: str
    optimizer: Adam
    enabled: bool = True


def update_step(
        forward: t.Callable[[], SarLossBundle],
        groups: t.Sequence[ParamGroup],
        modules: t.Sequence[Module]
) -> SarLossBundle:
    """
    Step every enabled group in order, each on a fresh forward pass

    Gradients of all modules are cleared before every backward, so a group is
    only moved by its own loss.

    Args:
        forward (t.Callable[[], SarLossBundle]): Recomputes the bundle from current parameters
        groups (t.Sequence[ParamGroup]): Groups in update order
        modules (t.Sequence[Module]): Every module whose gradients must be cleared

    Returns:
        SarLossBundle: Bundle of the first forward pass (before any update of this step)

    Raises:
        NumericError: If a loss is not finite (no group is stepped on it)
    """

    first: t.Optional[SarLossBundle] = None

    for group in groups:
        if not group.enabled:
            continue

        bundle = forward()

        try:
            bundle.check_finite()

        except NumericError:
            # Drop the recorded graph of the rejected pass
            get_tape().clear()
            logger.warning(f"Rejected {group.name} update: non-finite losses")
            raise

        if first is None:
            first = bundle

        for module in modules:
            module.zero_grad()

        backward(getattr(bundle, group.loss))
        group.optimizer.step()

    if first is None:
        # Nothing enabled => report only
        with no_grad():
            first = forward()

    return first


__all__ = (
    "SarSettings",
    "SarLossBundle",
    "ParamGroup",
    "sar_losses",
    "update_step"
)
