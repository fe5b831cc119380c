# coding=utf-8

import typing as t
from functools import partial

import gymnasium as gym
from gymnasium.vector import AutoresetMode, SyncVectorEnv
from gymnasium.wrappers import FrameStackObservation, ReshapeObservation

from errors import EnvError

from .gridworld import StyledGridworld
from .pointmass import StyledPointMass
from .styles import StylePool


ENTRY_POINTS: t.Dict[str, t.Type[gym.Env]] = {
    "gridworld-v0": StyledGridworld,
    "pointmass-v0": StyledPointMass
}

ENV_IDS = tuple(ENTRY_POINTS)

# Episodes end inside the envs, no TimeLimit wrapper
for _env_id, _entry_point in ENTRY_POINTS.items():
    gym.register(id=_env_id, entry_point=_entry_point)


def check_env_id(env_id: str) -> str:
    """
    Raises:
        EnvError: If env_id is not one of ours
    """

    if env_id not in ENTRY_POINTS:
        raise EnvError(f"unknown environment {env_id!r}, registered: {', '.join(sorted(ENV_IDS))}")

    return env_id


def make(env_id: str, frame_stack: int = 1, style_pool: t.Optional[StylePool] = None) -> gym.Env:
    """
    Build an environment, frame-stacked along channels when frame_stack > 1

    Stacked observations are 3k x 32 x 32, oldest frame first; after a reset every slot holds
    the first frame.

    Raises:
        EnvError: If env_id is unknown or frame_stack < 1
    """

    if frame_stack < 1:
        raise EnvError(f"frame_stack must be at least 1, got {frame_stack}")

    env = gym.make(check_env_id(env_id), style_pool=style_pool)

    if frame_stack > 1:
        channels, height, width = env.observation_space.shape
        env = FrameStackObservation(env, frame_stack)
        env = ReshapeObservation(env, (channels * frame_stack, height, width))

    return env


def make_vector(env_id: str, num_envs: int, style_pool: StylePool, frame_stack: int = 1) -> SyncVectorEnv:
    """
    Sequentially stepped copies with same-step autoreset

    A finished copy is reset inside step(); its last observation is in infos["final_obs"],
    masked by infos["_final_obs"].
    """

    check_env_id(env_id)

    return SyncVectorEnv(
        [partial(make, env_id, frame_stack, style_pool) for _ in range(num_envs)],
        autoreset_mode=AutoresetMode.SAME_STEP
    )


def env_spaces(env_id: str, frame_stack: int = 1) -> t.Tuple[gym.spaces.Box, gym.spaces.Space]:
    """
    Observation and action space of a (stacked) environment
    """

    env = make(env_id, frame_stack)
    observation_space, action_space = env.observation_space, env.action_space
    env.close()

    return observation_space, action_space


def is_discrete(env_id: str) -> bool:
    return isinstance(env_spaces(env_id)[1], gym.spaces.Discrete)


__all__ = (
    "ENTRY_POINTS",
    "ENV_IDS",
    "check_env_id",
    "make",
    "make_vector",
    "env_spaces",
    "is_discrete"
)
