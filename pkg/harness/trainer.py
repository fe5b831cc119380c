# coding=utf-8

import json
import logging
import typing as t
from abc import ABCMeta, abstractmethod
from collections import deque
from pathlib import Path
from time import perf_counter

import numpy as np

from agents import (
    ParamGroup, PPOActorCritic, SACActorCritic, SarSettings, gae_advantages, normalize_advantages, polyak_update,
    sar_losses, update_step
)
from envs import MAX_LAYOUT_SEED, StylePool, augment_batch, env_spaces, make_vector
from errors import ConfigError, MissingArtifactError, NumericError
from style import PerturbGenerator
from tensor import Adam
from views import MetricsRecord, RunConfig

from .buffers import ReplayBuffer, RolloutBuffer
from .checkpoint import checkpoint_path, latest_checkpoint, load_checkpoint, prefixed, save_checkpoint, unprefixed
from .evaluation import evaluate
from .metrics import MetricsWriter
from .normalization import RewardNormalizer
from .seeding import seed_everything


logger = logging.getLogger(__name__)

CONFIG_SCHEMA_VERSION = 1

Model = t.Union[PPOActorCritic, SACActorCritic]


def _crossed(before: int, after: int, every: int) -> bool:
    return every > 0 and after // every > before // every


def build_networks(cfg: RunConfig, streams: t.Any) -> t.Tuple[Model, PerturbGenerator]:
    """
    Actor-critic and perturbation generator of a resolved config, each from its own init stream
    """

    observation_space, action_space = env_spaces(cfg.env_id, cfg.frame_stack)
    channels = (cfg.channels_1, cfg.channels_2, cfg.channels_3)

    if cfg.algorithm == "ppo":
        model: Model = PPOActorCritic(
            observation_space.shape, int(action_space.n), streams["policy-init"],
            channels, cfg.embedding_dim, cfg.head_hidden
        )

    else:
        model = SACActorCritic(
            observation_space.shape, action_space.shape[0], streams["policy-init"],
            channels, cfg.embedding_dim, cfg.head_hidden, cfg.alpha_init
        )

    generator = PerturbGenerator(cfg.channels_2, streams["generator-init"], cfg.generator_hidden)
    return model, generator


class Trainer(metaclass=ABCMeta):
    """
    Training loop state shared by both algorithms
    """

    def __init__(self, cfg: RunConfig, run_dir: t.Union[str, Path]) -> None:
        """
        Initialize trainer

        Args:
            cfg (RunConfig): Resolved run configuration
            run_dir (t.Union[str, Path]): Output directory (config.json already written)
        """

        self.cfg = cfg
        self.run_dir = Path(run_dir)
        self.config_hash = cfg.config_hash

        self.streams = seed_everything(cfg.seed)
        self.envs = make_vector(cfg.env_id, cfg.num_envs, StylePool("train", cfg.num_train_styles), cfg.frame_stack)
        self.observation_shape = self.envs.single_observation_space.shape

        self.model, self.generator = build_networks(cfg, self.streams)
        self.generator_optimizer = Adam(
            self.generator.parameters(), cfg.generator_learning_rate, eps=cfg.adam_eps, max_grad_norm=self._clip_norm
        )

        self.writer = MetricsWriter(self.run_dir)
        self.timestep = 0
        self.recent_returns: t.Deque[float] = deque(maxlen=10)
        self.episode_returns = np.zeros(cfg.num_envs)
        self.last_checkpoint: t.Optional[int] = None
        self.started = perf_counter()

    _clip_norm = 0.0

    # Hooks

    @abstractmethod
    def run(self) -> None:
        """
        Train for cfg.total_timesteps environment steps
        """

    # Shared helpers

    def settings(self, timestep: int) -> SarSettings:
        return SarSettings.from_config(self.cfg, timestep)

    def augment(self, obs: np.ndarray) -> np.ndarray:
        return augment_batch(obs, self.cfg.augmentation, self.streams["augmentation"])

    def permutation(self, size: int) -> t.Optional[np.ndarray]:
        return self.streams["permutation"].permutation(size) if self.cfg.style_mixing else None

    def reset_envs(self) -> np.ndarray:
        """
        Seed every copy from the env stream; later episodes draw from each copy's own generator
        """

        seeds = self.streams["env"].integers(0, MAX_LAYOUT_SEED, self.cfg.num_envs)
        obs, _ = self.envs.reset(seed=[int(seed) for seed in seeds])

        self.episode_returns[:] = 0.0
        return obs

    def track_episodes(self, rewards: np.ndarray, dones: np.ndarray) -> None:
        self.episode_returns += rewards

        for index in np.flatnonzero(dones):
            self.recent_returns.append(float(self.episode_returns[index]))
            self.episode_returns[index] = 0.0

    def state_arrays(self) -> t.Dict[str, np.ndarray]:
        """
        Network weights persisted in a checkpoint, flat (optimizer moments are not kept)
        """

        return {**prefixed("model", self.model.state_dict()), **prefixed("generator", self.generator.state_dict())}

    def save(self, name: t.Optional[str] = None) -> Path:
        path = checkpoint_path(self.run_dir, self.timestep) if name is None else self.run_dir / "checkpoints" / name
        save_checkpoint(path, self.state_arrays(), self.config_hash, self.timestep)

        if name is None:
            self.last_checkpoint = self.timestep

        return path

    def after_update(self, before: int, losses: t.Sequence[t.Dict[str, float]], force: bool = False) -> bool:
        """
        Evaluate, log and checkpoint when the step counter crossed an interval

        Returns:
            bool: True if a metrics row was written
        """

        cfg = self.cfg
        final = self.timestep >= cfg.total_timesteps
        evals: t.Dict[str, float] = {}

        if _crossed(before, self.timestep, cfg.eval_every) or (final and cfg.eval_every > 0):
            for pool in ("train", "test"):
                evals[f"eval_return_{pool}_styles"] = evaluate(self.model, cfg, pool, cfg.eval_episodes).mean

        logged = bool(force or evals or final)

        if logged:
            self.log_row(losses, evals)

        if _crossed(before, self.timestep, cfg.checkpoint_every) or (final and self.last_checkpoint != self.timestep):
            self.save()

        return logged

    def log_row(self, losses: t.Sequence[t.Dict[str, float]], evals: t.Mapping[str, float]) -> None:
        mean = {
            name: float(np.mean([entry[name] for entry in losses])) if losses else 0.0
            for name in ("l_div", "g_critic", "actor_loss", "critic_loss", "gen_loss", "entropy_bonus")
        }

        record = MetricsRecord(
            timestep=self.timestep,
            episode_return=float(np.mean(self.recent_returns)) if self.recent_returns else None,
            l_div=max(mean["l_div"], 0.0),
            g_critic=max(mean["g_critic"], 0.0),
            actor_loss=mean["actor_loss"],
            critic_loss=mean["critic_loss"],
            gen_loss=mean["gen_loss"],
            entropy=mean["entropy_bonus"],
            wall_time=perf_counter() - self.started,
            **evals
        )

        self.writer.append(record)
        logger.info(
            f"step {record.timestep}: return {record.episode_return}, l_div {record.l_div:.4g}, "
            f"actor {record.actor_loss:.4g}, critic {record.critic_loss:.4g}"
        )

    def snapshot(self, error: NumericError) -> None:
        """
        Persist the failing state next to the run outputs
        """

        diagnostic = {
            "step": self.timestep,
            "error": str(error),
            "losses": {
                name: (value if np.isfinite(value) else repr(value))
                for name, value in getattr(error, "losses", {}).items()
            }
        }

        with open(self.run_dir / "diagnostic.json", "wt") as diagnostic_file:
            json.dump(diagnostic, diagnostic_file, indent=2)

        self.save("diagnostic.bin")
        logger.error(f"Non-finite loss at step {self.timestep}, snapshot written to {self.run_dir}")

    def train(self) -> Path:
        try:
            self.run()

        except NumericError as error:
            self.snapshot(error)
            raise

        logger.info(f"Successfully trained {self.timestep} steps ({perf_counter() - self.started:.3f} s)")
        return self.run_dir


class PPOTrainer(Trainer):
    """
    On-policy rollouts, GAE and clipped updates with the style-agnostic terms
    """

    model: PPOActorCritic

    def __init__(self, cfg: RunConfig, run_dir: t.Union[str, Path]) -> None:
        self._clip_norm = cfg.max_grad_norm
        super().__init__(cfg, run_dir)

        self.actor_optimizer = Adam(self.model.actor_parameters(), cfg.learning_rate, eps=cfg.adam_eps, max_grad_norm=cfg.max_grad_norm)
        self.critic_optimizer = Adam(self.model.critic_parameters(), cfg.learning_rate, eps=cfg.adam_eps, max_grad_norm=cfg.max_grad_norm)

        self.rollout = RolloutBuffer(cfg.rollout_steps, cfg.num_envs, self.observation_shape)
        self.reward_norm = RewardNormalizer(cfg.num_envs, cfg.gamma) if cfg.reward_norm else None

    def collect(self, obs: np.ndarray) -> np.ndarray:
        """
        Fill the rollout buffer, returning the observations after the last step
        """

        self.rollout.clear()

        while not self.rollout.full:
            actions, logp, values = self.model.act(obs, self.streams["policy"])
            next_obs, rewards, terminated, truncated, _ = self.envs.step(actions)
            dones = terminated | truncated
            self.track_episodes(rewards, dones)

            if self.reward_norm is not None:
                rewards = self.reward_norm(rewards, dones)

            self.rollout.add(obs, actions, rewards, dones, values, logp)
            self.timestep += self.envs.num_envs
            obs = next_obs

        self.rollout.finish(self.model.act(obs)[2])
        return obs

    def update(self, timestep: int) -> t.List[t.Dict[str, float]]:
        """
        Epochs of minibatch updates on the collected rollout

        Args:
            timestep (int): Step count at rollout start (drives the warm-up indicator)
        """

        cfg = self.cfg
        settings = self.settings(timestep)
        advantages, targets = gae_advantages(self.rollout, cfg.gamma, cfg.gae_lambda)

        groups = [
            ParamGroup("critic", "critic_loss", self.critic_optimizer),
            ParamGroup("generator", "gen_loss", self.generator_optimizer, enabled=settings.adversarial),
            ParamGroup("actor", "actor_loss", self.actor_optimizer)
        ]
        losses = []

        for _ in range(cfg.ppo_epochs):
            for batch in self.rollout.minibatches(advantages, targets, cfg.num_minibatches, self.streams["minibatch"]):
                # Drawn once, reused by every forward pass of this minibatch
                batch = batch._replace(obs=self.augment(batch.obs), advantages=normalize_advantages(batch.advantages))
                perm = self.permutation(len(batch.obs))

                bundle = update_step(
                    lambda: sar_losses(self.model, batch, self.generator, settings, perm),
                    groups,
                    (self.model, self.generator)
                )
                losses.append(bundle.scalars())

        return losses

    def run(self) -> None:
        obs = self.reset_envs()

        while self.timestep < self.cfg.total_timesteps:
            before = self.timestep
            obs = self.collect(obs)

            self.after_update(before, self.update(before), force=True)


class SACTrainer(Trainer):
    """
    Off-policy updates from a replay buffer with the style-agnostic terms
    """

    model: SACActorCritic

    def __init__(self, cfg: RunConfig, run_dir: t.Union[str, Path]) -> None:
        super().__init__(cfg, run_dir)

        self.actor_optimizer = Adam(self.model.actor_parameters(), cfg.learning_rate, eps=cfg.adam_eps)
        self.critic_optimizer = Adam(self.model.critic_parameters(), cfg.learning_rate, eps=cfg.adam_eps)
        self.alpha_optimizer = Adam(self.model.alpha_parameters(), cfg.alpha_learning_rate, betas=(0.5, 0.999), eps=cfg.adam_eps)

        self.replay = ReplayBuffer(cfg.buffer_size, self.observation_shape, self.model.action_dim)
        self.updates = 0
        self.pending: t.List[t.Dict[str, float]] = []

    def act(self, obs: np.ndarray) -> np.ndarray:
        if self.timestep < self.cfg.initial_steps:
            # Uniform exploration
            return self.streams["policy"].uniform(-1.0, 1.0, (len(obs), self.model.action_dim))

        return self.model.act(obs, self.streams["policy"])

    def update(self, timestep: int) -> t.Dict[str, float]:
        """
        One gradient step: critic, generator, then actor and temperature every actor_update_every
        """

        cfg = self.cfg
        settings = self.settings(timestep)
        self.updates += 1

        batch = self.replay.sample(cfg.batch_size, self.streams["minibatch"])
        batch = batch._replace(obs=self.augment(batch.obs), next_obs=self.augment(batch.next_obs))
        perm = self.permutation(cfg.batch_size)

        noise_shape = (cfg.batch_size, self.model.action_dim)
        noise = self.streams["policy"].standard_normal(noise_shape)
        noise_next = self.streams["policy"].standard_normal(noise_shape)

        actor_turn = self.updates % cfg.actor_update_every == 0
        groups = [
            ParamGroup("critic", "critic_loss", self.critic_optimizer),
            ParamGroup("generator", "gen_loss", self.generator_optimizer, enabled=settings.adversarial),
            ParamGroup("actor", "actor_loss", self.actor_optimizer, enabled=actor_turn),
            ParamGroup("alpha", "alpha_loss", self.alpha_optimizer, enabled=actor_turn)
        ]

        bundle = update_step(
            lambda: sar_losses(self.model, batch, self.generator, settings, perm, noise, noise_next),
            groups,
            (self.model, self.generator)
        )

        if self.updates % cfg.target_update_every == 0:
            polyak_update(self.model.target_encoder, self.model.encoder, cfg.encoder_tau)
            polyak_update(self.model.target_q_1, self.model.q_1, cfg.critic_tau)
            polyak_update(self.model.target_q_2, self.model.q_2, cfg.critic_tau)

        return bundle.scalars()

    def run(self) -> None:
        cfg = self.cfg
        obs = self.reset_envs()

        while self.timestep < cfg.total_timesteps:
            actions = self.act(obs)
            next_obs, rewards, terminated, truncated, infos = self.envs.step(actions)
            dones = terminated | truncated
            self.track_episodes(rewards, dones)

            for index in range(self.envs.num_envs):
                # Bootstrap through horizon cuts, not through terminations
                final_obs = infos["final_obs"][index] if dones[index] else next_obs[index]
                self.replay.add(obs[index], actions[index], rewards[index], final_obs, bool(terminated[index]))

            before = self.timestep
            self.timestep += self.envs.num_envs
            obs = next_obs

            if self.timestep >= cfg.initial_steps and len(self.replay) >= cfg.batch_size:
                # One update per environment step
                for _ in range(self.envs.num_envs):
                    self.pending.append(self.update(before))

            if self.after_update(before, self.pending, force=_crossed(before, self.timestep, cfg.log_every)):
                self.pending = []


TRAINERS: t.Dict[str, t.Type[Trainer]] = {
    "ppo": PPOTrainer,
    "sac": SACTrainer
}


def run_dir_name(cfg: RunConfig) -> str:
    return f"{cfg.env_id}_{cfg.algorithm}_{cfg.variant}_seed{cfg.seed}_{cfg.config_hash[:8]}"


def write_run_config(run_dir: Path, cfg: RunConfig, raw: t.Optional[t.Mapping[str, t.Any]] = None) -> None:
    """
    config.json: verbatim settings, resolved settings and hash
    """

    resolved = cfg.resolved()
    document = {
        "schema_version": CONFIG_SCHEMA_VERSION,
        "config": dict(raw) if raw is not None else cfg.to_dict(),
        "resolved": resolved.to_dict(),
        "hash": resolved.config_hash,
        "variant": cfg.variant
    }

    with open(run_dir / "config.json", "wt") as config_file:
        json.dump(document, config_file, indent=2, sort_keys=True)


def read_run_config(run_dir: t.Union[str, Path]) -> RunConfig:
    """
    Resolved configuration of an existing run

    Raises:
        MissingArtifactError: If the run has no config.json
        ConfigError: If the stored hash does not match the stored settings
    """

    path = Path(run_dir) / "config.json"

    if not path.is_file():
        raise MissingArtifactError(f"{path} not found (not a run directory?)")

    with open(path, "rt") as config_file:
        document = json.load(config_file)

    cfg = t.cast(RunConfig, RunConfig.from_dict(document["resolved"]))

    if cfg.config_hash != document["hash"]:
        raise ConfigError(f"{path} hash {document['hash']} does not match its settings ({cfg.config_hash})")

    return cfg


def train(
        cfg: RunConfig,
        runs_dir: t.Union[str, Path],
        out: t.Optional[t.Union[str, Path]] = None,
        raw: t.Optional[t.Mapping[str, t.Any]] = None
) -> Path:
    """
    Train one configuration

    Args:
        cfg (RunConfig): Validated configuration
        runs_dir (t.Union[str, Path]): Root of run directories
        out (t.Optional[t.Union[str, Path]]): Explicit run directory
        raw (t.Optional[t.Mapping[str, t.Any]]): Settings as given by the user (persisted verbatim)

    Returns:
        Path: Run directory
    """

    resolved = t.cast(RunConfig, cfg.resolved())
    run_dir = Path(out) if out is not None else Path(runs_dir) / run_dir_name(resolved)
    run_dir.mkdir(parents=True, exist_ok=True)

    write_run_config(run_dir, cfg, raw)
    logger.info(f"Training {resolved.variant} ({resolved.algorithm} on {resolved.env_id}, seed {resolved.seed}) into {run_dir}")

    return TRAINERS[resolved.algorithm](resolved, run_dir).train()


def restore(
        run_dir: t.Union[str, Path],
        checkpoint: t.Optional[t.Union[str, Path]] = None
) -> t.Tuple[RunConfig, Model, PerturbGenerator, t.Dict[str, t.Any]]:
    """
    Rebuild networks of a run from a checkpoint (the latest by default)

    Returns:
        t.Tuple[RunConfig, Model, PerturbGenerator, t.Dict[str, t.Any]]: config, model, generator, checkpoint header
    """

    cfg = read_run_config(run_dir)
    path = Path(checkpoint) if checkpoint is not None else latest_checkpoint(run_dir)
    arrays, header = load_checkpoint(path, cfg.config_hash)

    model, generator = build_networks(cfg, seed_everything(cfg.seed))
    model.load_state_dict(unprefixed("model", arrays))
    generator.load_state_dict(unprefixed("generator", arrays))

    return cfg, model, generator, header


__all__ = (
    "build_networks",
    "Trainer",
    "PPOTrainer",
    "SACTrainer",
    "TRAINERS",
    "run_dir_name",
    "write_run_config",
    "read_run_config",
    "train",
    "restore"
)
