# coding=utf-8

import typing as t

import numpy as np
import pytest

from agents import PPOActorCritic, SACActorCritic
from style import PerturbGenerator
from tensor import get_tape


TINY_NETWORK = {
    "channels_1": 4,
    "channels_2": 4,
    "channels_3": 4,
    "embedding_dim": 8,
    "head_hidden": 8,
    "generator_hidden": 8
}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def ppo_settings() -> t.Dict[str, t.Any]:
    """
    PPO run small enough for the unit suite (two rollouts of 2 x 8 steps)
    """

    return {
        "algorithm": "ppo",
        "env_id": "gridworld-v0",
        "seed": 3,
        "total_timesteps": 32,
        "num_envs": 2,
        "num_train_styles": 4,
        "rollout_steps": 8,
        "ppo_epochs": 1,
        "num_minibatches": 2,
        "eval_every": 0,
        "eval_episodes": 1,
        "checkpoint_every": 16,
        **TINY_NETWORK
    }


@pytest.fixture
def sac_settings() -> t.Dict[str, t.Any]:
    return {
        "algorithm": "sac",
        "env_id": "pointmass-v0",
        "seed": 5,
        "total_timesteps": 16,
        "num_envs": 1,
        "num_train_styles": 4,
        "frame_stack": 1,
        "initial_steps": 8,
        "batch_size": 4,
        "buffer_size": 64,
        "log_every": 4,
        "eval_every": 0,
        "checkpoint_every": 0,
        **TINY_NETWORK
    }


@pytest.fixture
def tiny_ppo(rng: np.random.Generator) -> PPOActorCritic:
    """
    Actor-critic on 3 x 8 x 8 observations (branch point 3 x 2 x 2)
    """

    return PPOActorCritic((3, 8, 8), 4, rng, channels=(2, 3, 2), embedding_dim=4, hidden=4)


@pytest.fixture
def tiny_sac(rng: np.random.Generator) -> SACActorCritic:
    return SACActorCritic((3, 8, 8), 2, rng, channels=(2, 3, 2), embedding_dim=4, hidden=4)


@pytest.fixture
def tiny_generator(rng: np.random.Generator) -> PerturbGenerator:
    """
    Generator with non-zero heads, so that every parameter receives gradient
    """

    generator = PerturbGenerator(3, rng, hidden=4)
    generator.beta_head.weight.data = rng.normal(0.0, 0.3, generator.beta_head.weight.shape)
    generator.gamma_head.weight.data = rng.normal(0.0, 0.3, generator.gamma_head.weight.shape)

    return generator


@pytest.fixture(autouse=True)
def fresh_tape() -> t.Iterator[None]:
    """
    Drop graphs that a test recorded but never differentiated
    """

    yield
    get_tape().clear()
