# coding=utf-8

import math
import typing as t

import numpy as np

from errors import ShapeError
from tensor import (
    Tensor, as_tensor, clip, exp, log, log_softmax, softmax_logits_to_probs, square, tanh, take
)


LOG_STD_MIN, LOG_STD_MAX = -10.0, 2.0

_LOG_2PI = math.log(2.0 * math.pi)


class Categorical:
    """
    Distribution over a discrete action set, one row per sample
    """

    family = "categorical"

    def __init__(self, logits: Tensor) -> None:
        self.logits = as_tensor(logits)

        if self.logits.ndim != 2:
            raise ShapeError(f"categorical logits must be B x A, got {self.logits.shape}")

        self.probs = softmax_logits_to_probs(self.logits)
        self.log_probs = log_softmax(self.logits)

    @property
    def arity(self) -> int:
        return self.logits.shape[1]

    def log_prob(self, actions: np.ndarray) -> Tensor:
        """
        Log probability of integer actions, shape B
        """

        actions = np.asarray(actions, dtype=np.int64).reshape(-1)
        return take(self.log_probs, (np.arange(actions.size), actions))

    def entropy(self) -> Tensor:
        return -(self.probs * self.log_probs).sum(axis=1)

    def mode(self) -> np.ndarray:
        return np.argmax(self.probs.data, axis=1)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """
        Inverse-CDF sampling (one uniform draw per row)
        """

        cdf = np.cumsum(self.probs.data, axis=1)
        draws = rng.random((cdf.shape[0], 1))

        return np.minimum((draws > cdf).sum(axis=1), self.arity - 1)


class DiagGaussian:
    """
    Diagonal Gaussian with log-std clamped into [LOG_STD_MIN, LOG_STD_MAX]
    """

    family = "gaussian"

    def __init__(self, mean: Tensor, log_std: Tensor) -> None:
        self.mean = as_tensor(mean)
        self.log_std = clip(as_tensor(log_std), LOG_STD_MIN, LOG_STD_MAX)

        if self.mean.shape != self.log_std.shape or self.mean.ndim != 2:
            raise ShapeError(f"gaussian mean {self.mean.shape} and log_std {self.log_std.shape} must both be B x D")

        self.std = exp(self.log_std)

    @property
    def arity(self) -> int:
        return self.mean.shape[1]

    def log_prob(self, actions: t.Union[np.ndarray, Tensor]) -> Tensor:
        z = (as_tensor(actions) - self.mean) / self.std
        return (square(z) * -0.5 - self.log_std - 0.5 * _LOG_2PI).sum(axis=1)

    def entropy(self) -> Tensor:
        return (self.log_std + 0.5 * (1.0 + _LOG_2PI)).sum(axis=1)

    def mode(self) -> np.ndarray:
        return self.mean.numpy()

    def rsample(self, noise: np.ndarray) -> Tensor:
        """
        Reparameterized sample mean + std * noise
        """

        return self.mean + self.std * noise

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.rsample(rng.standard_normal(self.mean.shape)).numpy()


class TanhGaussian(DiagGaussian):
    """
    Gaussian squashed into (-1, 1) by tanh

    Divergences are taken between the underlying Gaussians (tanh is a bijection).
    """

    def rsample_with_log_prob(self, noise: np.ndarray) -> t.Tuple[Tensor, Tensor]:
        """
        Squashed reparameterized sample and its log probability

        Args:
            noise (np.ndarray): Standard normal draws, B x D

        Returns:
            t.Tuple[Tensor, Tensor]: action B x D, log probability B
        """

        pre_tanh = self.rsample(noise)
        action = tanh(pre_tanh)

        # Change of variables
        correction = log(1.0 - square(action) + 1e-6).sum(axis=1)
        return action, DiagGaussian.log_prob(self, pre_tanh) - correction

    def mode(self) -> np.ndarray:
        return np.tanh(self.mean.data)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return np.tanh(self.rsample(rng.standard_normal(self.mean.shape)).data)


PolicyDist = t.Union[Categorical, DiagGaussian]


def l_div(dist_clean: PolicyDist, dist_adv: PolicyDist) -> Tensor:
    """
    Batch mean of KL[clean || adv], gradients flow through both arguments

    Categorical: direct sum over actions. Gaussian: closed form per dimension.

    Raises:
        TypeError: If families differ
        ShapeError: If batch sizes or action arities differ
    """

    if dist_clean.family != dist_adv.family:
        raise TypeError(f"cannot compare {dist_clean.family} and {dist_adv.family} distributions")

    if dist_clean.arity != dist_adv.arity:
        raise ShapeError(f"action arity differs: {dist_clean.arity} vs {dist_adv.arity}")

    if isinstance(dist_clean, Categorical):
        kl = (dist_clean.probs * (dist_clean.log_probs - dist_adv.log_probs)).sum(axis=1)

    else:
        var_clean, var_adv = square(dist_clean.std), square(dist_adv.std)
        kl = (
            dist_adv.log_std - dist_clean.log_std
            + (var_clean + square(dist_clean.mean - dist_adv.mean)) / (var_adv * 2.0)
            - 0.5
        ).sum(axis=1)

    return kl.mean()


__all__ = (
    "LOG_STD_MIN",
    "LOG_STD_MAX",
    "Categorical",
    "DiagGaussian",
    "TanhGaussian",
    "PolicyDist",
    "l_div"
)
