# coding=utf-8

import typing as t

import numpy as np

from errors import ShapeError


class RolloutBatch(t.NamedTuple):
    obs: np.ndarray
    actions: np.ndarray
    logp_old: np.ndarray
    advantages: np.ndarray
    targets: np.ndarray


class ReplayBatch(t.NamedTuple):
    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_obs: np.ndarray
    dones: np.ndarray


class RolloutBuffer:
    """
    On-policy storage of steps x num_envs transitions
    """

    def __init__(self, steps: int, num_envs: int, obs_shape: t.Tuple[int, ...]) -> None:
        self.steps, self.num_envs = steps, num_envs
        self.obs_shape = tuple(obs_shape)

        self.obs = np.zeros((steps, num_envs, *self.obs_shape))
        self.actions = np.zeros((steps, num_envs), dtype=np.int64)
        self.rewards = np.zeros((steps, num_envs))
        self.dones = np.zeros((steps, num_envs))
        self.values = np.zeros((steps, num_envs))
        self.logp = np.zeros((steps, num_envs))
        self.last_values = np.zeros(num_envs)

        self.position = 0

    @property
    def full(self) -> bool:
        return self.position == self.steps

    def add(
            self,
            obs: np.ndarray,
            actions: np.ndarray,
            rewards: np.ndarray,
            dones: np.ndarray,
            values: np.ndarray,
            logp: np.ndarray
    ) -> None:
        """
        Store one vector step (obs are the observations the actions were chosen on)

        Raises:
            ShapeError: If the buffer is already full
        """

        if self.full:
            raise ShapeError(f"rollout buffer is full ({self.steps} steps), clear it first")

        step = self.position

        self.obs[step] = obs
        self.actions[step] = actions
        self.rewards[step] = rewards
        self.dones[step] = dones
        self.values[step] = values
        self.logp[step] = logp

        self.position += 1

    def finish(self, last_values: np.ndarray) -> None:
        """
        Store bootstrap values of the states following the last step
        """

        self.last_values = np.asarray(last_values, dtype=np.float64).reshape(self.num_envs)

    def clear(self) -> None:
        self.position = 0

    def minibatches(
            self,
            advantages: np.ndarray,
            targets: np.ndarray,
            num_minibatches: int,
            rng: np.random.Generator
    ) -> t.Iterator[RolloutBatch]:
        """
        Shuffled, equally sized minibatches over all steps and instances
        """

        if not self.full:
            raise ShapeError(f"rollout holds {self.position} of {self.steps} steps")

        total = self.steps * self.num_envs
        order = rng.permutation(total)
        size = total // num_minibatches

        obs = self.obs.reshape(total, *self.obs_shape)
        actions, logp = self.actions.reshape(total), self.logp.reshape(total)
        advantages, targets = advantages.reshape(total), targets.reshape(total)

        for start in range(0, size * num_minibatches, size):
            index = order[start:start + size]
            yield RolloutBatch(obs[index], actions[index], logp[index], advantages[index], targets[index])


class ReplayBuffer:
    """
    Ring buffer of transitions with uniform sampling

    Observations are stored as 8-bit levels (renderings are already quantized).
    """

    def __init__(self, capacity: int, obs_shape: t.Tuple[int, ...], action_dim: int) -> None:
        self.capacity = capacity

        self.obs = np.zeros((capacity, *obs_shape), dtype=np.uint8)
        self.next_obs = np.zeros((capacity, *obs_shape), dtype=np.uint8)
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.dones = np.zeros(capacity)

        self.position = 0
        self.size = 0

    def add(self, obs: np.ndarray, action: np.ndarray, reward: float, next_obs: np.ndarray, done: bool) -> None:
        """
        Store one transition, overwriting the oldest when full
        """

        index = self.position

        self.obs[index] = np.round(obs * 255.0)
        self.next_obs[index] = np.round(next_obs * 255.0)
        self.actions[index] = action
        self.rewards[index] = reward
        self.dones[index] = float(done)

        self.position = (self.position + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> ReplayBatch:
        """
        Uniform batch (with replacement)

        Raises:
            ShapeError: If fewer transitions are stored than requested
        """

        if self.size < batch_size:
            raise ShapeError(f"replay buffer holds {self.size} transitions, batch of {batch_size} requested")

        index = rng.integers(0, self.size, size=batch_size)

        return ReplayBatch(
            obs=self.obs[index] / 255.0,
            actions=self.actions[index],
            rewards=self.rewards[index],
            next_obs=self.next_obs[index] / 255.0,
            dones=self.dones[index]
        )

    def __len__(self) -> int:
        return self.size


__all__ = (
    "RolloutBatch",
    "ReplayBatch",
    "RolloutBuffer",
    "ReplayBuffer"
)
