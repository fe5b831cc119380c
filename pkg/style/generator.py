# coding=utf-8

import logging

import numpy as np

from errors import NumericError, ShapeError
from tensor import Linear, Module, Tensor, as_tensor, mean, softplus, tanh

from .layers import EPS_GAMMA, StyleStats


logger = logging.getLogger(__name__)


class PerturbGenerator(Module):
    """
    Maps a feature map to adversarial per-channel style statistics

    Global average pool -> two tanh layers -> beta and gamma heads.
    Every sample is conditioned only on its own feature map.
    """

    def __init__(self, channels: int, rng: np.random.Generator, hidden: int = 64) -> None:
        """
        Initialize generator

        Args:
            channels (int): Channels of the attacked feature map
            rng (np.random.Generator): Initialization stream
            hidden (int): Width of the hidden layers
        """

        self.channels = channels

        self.hidden_1 = Linear(channels, hidden, rng)
        self.hidden_2 = Linear(hidden, hidden, rng)

        # Zero-initialized heads start from beta = 0, gamma = softplus(0) + eps
        self.beta_head = Linear(hidden, channels, rng, zero_init=True)
        self.gamma_head = Linear(hidden, channels, rng, zero_init=True)

        logger.debug(f"Perturbation generator with {self.num_parameters} parameters")

    def forward(self, z: Tensor) -> StyleStats:
        return generate_perturbation(self, z)


def generate_perturbation(gen: PerturbGenerator, z: Tensor) -> StyleStats:
    """
    Produce adversarial style statistics for every sample of z

    Args:
        gen (PerturbGenerator): Generator network
        z (Tensor): Feature map B x C x H x W

    Returns:
        StyleStats: beta = raw beta, gamma = softplus(raw gamma) + EPS_GAMMA

    Raises:
        NumericError: If z or generated statistics are not finite
    """

    z = as_tensor(z)

    if z.ndim != 4 or z.shape[1] != gen.channels:
        raise ShapeError(f"generator for {gen.channels} channels got feature map {z.shape}")

    if not np.all(np.isfinite(z.data)):
        raise NumericError("generator received non-finite features")

    pooled = mean(z, axis=(2, 3))
    hidden = tanh(gen.hidden_2(tanh(gen.hidden_1(pooled))))

    beta = gen.beta_head(hidden)
    gamma = softplus(gen.gamma_head(hidden)) + EPS_GAMMA

    if not (np.all(np.isfinite(beta.data)) and np.all(np.isfinite(gamma.data))):
        raise NumericError("generator produced non-finite style statistics")

    return StyleStats(beta=beta, gamma=gamma)


__all__ = (
    "PerturbGenerator",
    "generate_perturbation"
)
