# coding=utf-8

import typing as t
from dataclasses import dataclass

import numpy as np

from errors import ShapeError
from tensor import Tensor, as_tensor, channel_stats, reshape, take


# Variance guard inside sigma
EPS_STAT = 1e-5

# Lower bound of generated scales
EPS_GAMMA = 1e-3


@dataclass(frozen=True)
class StyleStats:
    """
    Target per-channel style statistics

    Attributes:
        beta (Tensor): Shift, B x C
        gamma (Tensor): Scale, B x C (strictly positive when generated)
    """

    beta: Tensor
    gamma: Tensor

    def __post_init__(self) -> None:
        if self.beta.shape != self.gamma.shape or self.beta.ndim != 2:
            raise ShapeError(f"beta {self.beta.shape} and gamma {self.gamma.shape} must both be B x C")

    @classmethod
    def of(cls, z: Tensor) -> "StyleStats":
        """
        Statistics of an existing feature map (beta = mu, gamma = sigma)
        """

        mu, sigma = channel_stats(z, EPS_STAT)
        return cls(beta=mu, gamma=sigma)

    def check(self, z: Tensor) -> None:
        """
        Raises:
            ShapeError: If stats do not match the batch and channel dims of z
        """

        if z.ndim != 4 or self.beta.shape != z.shape[:2]:
            raise ShapeError(f"style stats of shape {self.beta.shape} do not match feature map {z.shape}")


def _expand(stat: Tensor) -> Tensor:
    # B x C -> B x C x 1 x 1
    return reshape(stat, (*stat.shape, 1, 1))


def normalize(z: Tensor) -> Tensor:
    """
    Content of a feature map: (z - mu(z)) / sigma(z) per sample and channel
    """

    z = as_tensor(z)
    mu, sigma = channel_stats(z, EPS_STAT)

    return (z - _expand(mu)) / _expand(sigma)


def instance_norm(z: Tensor, stats: StyleStats) -> Tensor:
    """
    gamma * (z - mu(z)) / sigma(z) + beta

    Args:
        z (Tensor): Feature map B x C x H x W
        stats (StyleStats): Affine parameters, B x C each

    Returns:
        Tensor: Normalized map
    """

    z = as_tensor(z)
    stats.check(z)

    return _expand(stats.gamma) * normalize(z) + _expand(stats.beta)


def adain(z: Tensor, z_src: Tensor) -> Tensor:
    """
    Re-style z with the channel statistics of z_src
    """

    z, z_src = as_tensor(z), as_tensor(z_src)

    if z.shape != z_src.shape:
        raise ShapeError(f"adain needs equal shapes, got content {z.shape} and source {z_src.shape}")

    return instance_norm(z, StyleStats.of(z_src))


def style_mix_batch(
        z: Tensor,
        rng: t.Optional[np.random.Generator] = None,
        perm: t.Optional[np.ndarray] = None
) -> Tensor:
    """
    Swap styles within the minibatch: adain(z, z[perm]) for a uniform random permutation

    Args:
        z (Tensor): Feature map B x C x H x W
        rng (t.Optional[np.random.Generator]): Permutation stream, used when perm is not given
        perm (t.Optional[np.ndarray]): Explicit permutation of range(B)

    Returns:
        Tensor: Mixed feature map
    """

    z = as_tensor(z)

    if perm is None:
        if rng is None:
            raise ValueError("style_mix_batch needs either rng or perm")

        perm = rng.permutation(z.shape[0])

    perm = np.asarray(perm, dtype=np.int64)

    if sorted(perm.tolist()) != list(range(z.shape[0])):
        raise ShapeError(f"perm must be a permutation of range({z.shape[0]}), got {perm.tolist()}")

    return adain(z, take(z, perm))


def style_perturb(z: Tensor, stats: StyleStats) -> Tensor:
    """
    Move the style of z to generated statistics, keeping its content
    """

    return instance_norm(z, stats)


__all__ = (
    "EPS_STAT",
    "EPS_GAMMA",
    "StyleStats",
    "normalize",
    "instance_norm",
    "adain",
    "style_mix_batch",
    "style_perturb"
)
