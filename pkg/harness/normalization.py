# coding=utf-8

import numpy as np


class RunningMeanStd:
    """
    Streaming mean and variance (parallel update of batch moments)
    """

    def __init__(self, epsilon: float = 1e-4) -> None:
        self.mean = 0.0
        self.var = 1.0
        self.count = epsilon

    def update(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.float64).reshape(-1)

        batch_mean, batch_var, batch_count = float(values.mean()), float(values.var()), values.size
        delta = batch_mean - self.mean
        total = self.count + batch_count

        self.mean += delta * batch_count / total
        self.var = (self.var * self.count + batch_var * batch_count + delta ** 2 * self.count * batch_count / total) / total
        self.count = total


class RewardNormalizer:
    """
    Scale rewards by the running std of the discounted return of each instance
    """

    def __init__(self, num_envs: int, gamma: float, epsilon: float = 1e-8) -> None:
        self.gamma = gamma
        self.epsilon = epsilon
        self.returns = np.zeros(num_envs)
        self.stats = RunningMeanStd()

    def __call__(self, rewards: np.ndarray, dones: np.ndarray) -> np.ndarray:
        """
        Normalize one vector step of rewards (returns restart where dones is set)
        """

        self.returns = self.returns * self.gamma + rewards
        self.stats.update(self.returns)
        self.returns = np.where(dones, 0.0, self.returns)

        return rewards / np.sqrt(self.stats.var + self.epsilon)


__all__ = (
    "RunningMeanStd",
    "RewardNormalizer"
)
