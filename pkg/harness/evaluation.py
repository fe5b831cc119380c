# coding=utf-8

import logging
import typing as t
from time import perf_counter

import numpy as np

from agents import PPOActorCritic, SACActorCritic
from envs import MAX_LAYOUT_SEED, StylePool, make
from views import EvalSummary

from .metrics import mean_std
from .seeding import SeedStreams


logger = logging.getLogger(__name__)

Model = t.Union[PPOActorCritic, SACActorCritic]


class EpisodeResult(t.NamedTuple):
    style_id: int
    layout_seed: int
    episode_return: float


def greedy_action(model: Model, obs: np.ndarray) -> t.Any:
    """
    Deterministic action for one observation (mode or squashed mean), clean path only
    """

    if isinstance(model, PPOActorCritic):
        return int(model.act(obs[None])[0][0])

    return model.act(obs[None])[0]


def eval_pool(cfg: t.Any, pool: str) -> StylePool:
    """
    Styles an evaluation draws from (training prefix of the train pool, or the whole test pool)
    """

    return StylePool(pool, cfg.num_train_styles if pool == "train" else None)


def run_episodes(model: Model, cfg: t.Any, pool: str, episodes: int, seed: int) -> t.List[EpisodeResult]:
    """
    Play episodes, each with its own style and layout drawn from an evaluation stream

    Args:
        model (Model): Trained networks
        cfg (t.Any): Resolved run configuration
        pool (str): train or test
        episodes (int): Number of episodes
        seed (int): Evaluation seed

    Raises:
        PoolError: If pool is unknown
    """

    styles = eval_pool(cfg, pool)
    streams = SeedStreams(seed)
    env = make(cfg.env_id, cfg.frame_stack)
    results = []

    for episode in range(episodes):
        rng = streams.spawn(f"eval-{pool}", episode)
        layout_seed, style_id = int(rng.integers(0, MAX_LAYOUT_SEED)), styles.sample(rng)

        obs, _ = env.reset(options={"layout_seed": layout_seed, "style_id": style_id})
        done, total = False, 0.0

        while not done:
            obs, reward, terminated, truncated, _ = env.step(greedy_action(model, obs))
            done, total = terminated or truncated, total + float(reward)

        results.append(EpisodeResult(style_id, layout_seed, total))

    env.close()
    return results


def evaluate(model: Model, cfg: t.Any, pool: str = "test", episodes: int = 10, seed: t.Optional[int] = None) -> EvalSummary:
    """
    Mean and std of deterministic-policy returns on a style pool
    """

    seed = cfg.seed if seed is None else seed
    started = perf_counter()

    returns = [result.episode_return for result in run_episodes(model, cfg, pool, episodes, seed)]
    mean, std = mean_std(returns)

    logger.info(f"Successfully evaluated {episodes} episodes on {pool} styles: {mean:.3f} ± {std:.3f} ({perf_counter() - started:.3f} s)")
    return EvalSummary(pool=pool, mean=mean, std=std, episodes=episodes, seed=seed)


__all__ = (
    "EpisodeResult",
    "greedy_action",
    "eval_pool",
    "run_episodes",
    "evaluate"
)
