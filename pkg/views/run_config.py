# coding=utf-8

import json
import hashlib
import typing as t

from models import BaseSchema
from models.types import *


# Defaults that depend on the algorithm
_ALGORITHM_DEFAULTS: t.Dict[str, t.Dict[str, t.Any]] = {
    "ppo": {
        "gamma": 0.999,
        "learning_rate": 5e-4,
        "generator_learning_rate": 5e-4,
        "frame_stack": 1
    },
    "sac": {
        "gamma": 0.99,
        "learning_rate": 1e-3,
        "generator_learning_rate": 1e-3,
        "frame_stack": 3
    }
}

_CONTINUOUS_ENVS = {"pointmass-v0"}


class RunConfig(BaseSchema):
    """
    Settings of one training run
    """

    __version__ = 1

    # Experiment
    algorithm = Choice["ppo", "sac"]("algorithm", default="ppo", help="base algorithm")
    env_id = Choice["gridworld-v0", "pointmass-v0"]("env_id", default="gridworld-v0", help="environment id")
    seed = Integer[0, None]("seed", default=1, help="global seed")
    total_timesteps = Integer[1, None]("total_timesteps", default=300_000, help="environment steps")
    num_envs = Integer[1, None]("num_envs", default=8, help="parallel environment instances")
    num_train_styles = Integer[1, 200]("num_train_styles", default=200, help="styles drawn from the train pool")
    variant_name = String[64]("variant_name", required=False, help="label override for compare reports")

    # Style-agnostic terms
    style_mixing = Boolean("style_mixing", default=True, help="in-batch AdaIN mixing on the clean branch")
    lambda_actor = Float[0.0, None]("lambda_actor", default=0.01, help="actor divergence weight")
    lambda_gen = Float[0.0, None]("lambda_gen", required=False, help="generator weight (defaults to lambda_actor)")
    kappa = Float[0.0, None]("kappa", default=0.1, help="value similarity weight")
    warmup_timesteps = Integer[0, None]("warmup_timesteps", default=0, help="adversarial terms start here")
    augmentation = Choice["none", "trans", "color"]("augmentation", default="none", help="minibatch augmentation")

    # Evaluation, logging and checkpoints
    eval_every = Integer[0, None]("eval_every", default=50_000, help="timesteps between evaluations (0 = off)")
    eval_episodes = Integer[1, None]("eval_episodes", default=10, help="episodes per evaluation")
    checkpoint_every = Integer[0, None]("checkpoint_every", default=50_000, help="timesteps between checkpoints")
    log_every = Integer[1, None]("log_every", default=1_000, help="timesteps between SAC metric rows")

    # Shared optimization
    gamma = Float[0.0, 1.0]("gamma", required=False, help="discount factor")
    learning_rate = Float[0.0, None]("learning_rate", required=False, help="actor and critic learning rate")
    generator_learning_rate = Float[0.0, None]("generator_learning_rate", required=False, help="generator learning rate")
    adam_eps = Float[0.0, None]("adam_eps", default=1e-5, help="Adam epsilon")
    frame_stack = Integer[1, None]("frame_stack", required=False, help="stacked frames per observation")

    # Networks
    channels_1 = Integer[1, None]("channels_1", default=16, help="encoder block 1 channels")
    channels_2 = Integer[1, None]("channels_2", default=32, help="encoder block 2 channels")
    channels_3 = Integer[1, None]("channels_3", default=32, help="encoder block 3 channels")
    embedding_dim = Integer[1, None]("embedding_dim", default=64, help="encoder output features")
    head_hidden = Integer[1, None]("head_hidden", default=128, help="hidden width of SAC heads")
    generator_hidden = Integer[1, None]("generator_hidden", default=64, help="hidden width of the generator")

    # PPO
    gae_lambda = Float[0.0, 1.0]("gae_lambda", default=0.95, help="GAE lambda")
    rollout_steps = Integer[1, None]("rollout_steps", default=256, help="steps per rollout and env")
    ppo_epochs = Integer[1, None]("ppo_epochs", default=3, help="epochs per rollout")
    num_minibatches = Integer[1, None]("num_minibatches", default=8, help="minibatches per epoch")
    clip_range = Float[0.0, 1.0]("clip_range", default=0.2, help="PPO ratio clip range")
    entropy_coef = Float[0.0, None]("entropy_coef", default=0.01, help="entropy bonus")
    max_grad_norm = Float[0.0, None]("max_grad_norm", default=0.5, help="global gradient norm clip (0 = off)")
    reward_norm = Boolean("reward_norm", default=True, help="scale rewards by running return std")

    # SAC
    batch_size = Integer[1, None]("batch_size", default=128, help="replay minibatch size")
    buffer_size = Integer[1, None]("buffer_size", default=100_000, help="replay capacity")
    initial_steps = Integer[0, None]("initial_steps", default=1_000, help="uniform random steps before updates")
    alpha_init = Float[0.0, None]("alpha_init", default=0.1, help="initial temperature")
    alpha_learning_rate = Float[0.0, None]("alpha_learning_rate", default=1e-4, help="temperature learning rate")
    critic_tau = Float[0.0, 1.0]("critic_tau", default=0.01, help="target Q smoothing")
    encoder_tau = Float[0.0, 1.0]("encoder_tau", default=0.05, help="target encoder smoothing")
    actor_update_every = Integer[1, None]("actor_update_every", default=2, help="actor update period")
    target_update_every = Integer[1, None]("target_update_every", default=2, help="target update period")

    def _check(self) -> t.Dict[str, str]:
        """
        Cross-field checks
        """

        errors: t.Dict[str, str] = {}

        if self.algorithm == "sac" and self.env_id not in _CONTINUOUS_ENVS:
            # SAC needs a continuous action space
            errors["algorithm"] = f"sac requires a continuous action space, {self.env_id} is discrete"

        if self.algorithm == "ppo" and self.env_id in _CONTINUOUS_ENVS:
            # Categorical policy head only
            errors["algorithm"] = f"ppo requires a discrete action space, {self.env_id} is continuous"

        if self.algorithm == "ppo" and self.rollout_steps * self.num_envs < self.num_minibatches:
            # Empty minibatches
            errors["num_minibatches"] = (
                f"rollout of {self.rollout_steps * self.num_envs} samples "
                f"cannot be split into {self.num_minibatches} minibatches"
            )

        if self.algorithm == "sac" and self.batch_size > self.buffer_size:
            errors["batch_size"] = "must not exceed buffer_size"

        return errors

    def resolved(self) -> "RunConfig":
        """
        Copy with algorithm-dependent defaults filled in
        """

        values = self.to_dict()

        for name, default in _ALGORITHM_DEFAULTS[self.algorithm].items():
            if values[name] is None:
                values[name] = default

        if values["lambda_gen"] is None:
            # Equal coefficients
            values["lambda_gen"] = values["lambda_actor"]

        return t.cast(RunConfig, RunConfig.from_dict(values))

    @property
    def config_hash(self) -> str:
        """
        Hash of the resolved configuration
        """

        canonical = json.dumps(self.resolved().to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    @property
    def variant(self) -> str:
        """
        Ablation label of this configuration
        """

        if self.variant_name:
            # Explicit label
            return self.variant_name

        resolved = self.resolved()
        adversarial = resolved.lambda_actor > 0 or resolved.lambda_gen > 0

        if not resolved.style_mixing and not adversarial and resolved.kappa == 0:
            label = "base"

        elif not resolved.style_mixing:
            return "custom"

        elif not adversarial:
            label = "mixstyle-only"

        elif resolved.kappa == 0:
            label = "no-gcritic"

        else:
            label = "sar"

        if resolved.augmentation == "none":
            return label

        elif label == "sar":
            return f"sar+{resolved.augmentation}"

        return "custom"


__all__ = (
    "RunConfig",
)
