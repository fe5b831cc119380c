# coding=utf-8

import logging
import typing as t

import numpy as np

from errors import NumericError, ShapeError
from tensor import (
    Conv2d, Linear, Module, Tensor, as_tensor, avg_pool2d, concat, flatten, minimum, relu, tanh, no_grad
)

from .distributions import Categorical, TanhGaussian


logger = logging.getLogger(__name__)


class ConvBlock(Module):
    """
    conv 3x3 -> relu -> 2x2 average pool
    """

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator) -> None:
        self.conv = Conv2d(in_channels, out_channels, 3, rng, padding=1)

    def forward(self, x: Tensor) -> Tensor:
        return avg_pool2d(relu(self.conv(x)), 2)


class MLP(Module):
    """
    Linear layers with relu in between
    """

    def __init__(self, sizes: t.Sequence[int], rng: np.random.Generator, out_gain: float = 1.0) -> None:
        last = len(sizes) - 2

        self.layers = [
            Linear(fan_in, fan_out, rng, gain=out_gain if index == last else 1.0)
            for index, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:]))
        ]

    def forward(self, x: Tensor) -> Tensor:
        for index, layer in enumerate(self.layers):
            x = layer(x)

            if index < len(self.layers) - 1:
                x = relu(x)

        return x


class Encoder(Module):
    """
    Three conv blocks and an affine head, split into two branches after the second block
    """

    def __init__(
            self,
            obs_shape: t.Tuple[int, int, int],
            rng: np.random.Generator,
            channels: t.Tuple[int, int, int] = (16, 32, 32),
            embedding_dim: int = 64
    ) -> None:
        """
        Initialize encoder

        Args:
            obs_shape (t.Tuple[int, int, int]): C x H x W of observations (H, W divisible by 8)
            rng (np.random.Generator): Initialization stream
            channels (t.Tuple[int, int, int]): Output channels of the three blocks
            embedding_dim (int): Output features
        """

        in_channels, height, width = obs_shape

        if height % 8 or width % 8:
            raise ShapeError(f"observation spatial size must be divisible by 8, got {obs_shape}")

        self.obs_shape = tuple(obs_shape)
        self.branch_channels = channels[1]
        self.embedding_dim = embedding_dim

        self.block_1 = ConvBlock(in_channels, channels[0], rng)
        self.block_2 = ConvBlock(channels[0], channels[1], rng)
        self.block_3 = ConvBlock(channels[1], channels[2], rng)
        self.head = Linear(channels[2] * (height // 8) * (width // 8), embedding_dim, rng)

    def encode_to_branch(self, obs: t.Union[Tensor, np.ndarray]) -> Tensor:
        """
        Features at the branch point (after two blocks)

        Args:
            obs (t.Union[Tensor, np.ndarray]): Observations B x C x H x W in [0, 1]

        Returns:
            Tensor: Feature map B x C2 x H/4 x W/4
        """

        obs = as_tensor(obs)

        if obs.shape[1:] != self.obs_shape:
            raise ShapeError(f"encoder expects observations of shape (B, {', '.join(map(str, self.obs_shape))}), got {obs.shape}")

        return self.block_2(self.block_1(obs))

    def embed_from_branch(self, z: Tensor) -> Tensor:
        """
        Remaining block, flatten and affine head
        """

        return tanh(self.head(flatten(self.block_3(z))))

    def forward(self, obs: t.Union[Tensor, np.ndarray]) -> Tensor:
        return self.embed_from_branch(self.encode_to_branch(obs))


def _check_finite(tensor: Tensor, name: str) -> None:
    if not np.all(np.isfinite(tensor.data)):
        raise NumericError(f"{name} produced non-finite activations")


class PPOActorCritic(Module):
    """
    Shared encoder with a categorical policy head and a value head
    """

    def __init__(
            self,
            obs_shape: t.Tuple[int, int, int],
            num_actions: int,
            rng: np.random.Generator,
            channels: t.Tuple[int, int, int] = (16, 32, 32),
            embedding_dim: int = 64,
            hidden: int = 64
    ) -> None:
        self.encoder = Encoder(obs_shape, rng, channels, embedding_dim)
        self.policy_head = Linear(embedding_dim, num_actions, rng, gain=0.01)
        self.value_head = MLP((embedding_dim, hidden, 1), rng)

        logger.debug(f"PPO actor-critic with {self.num_parameters} parameters")

    # Parameter groups

    def actor_parameters(self) -> t.List[Tensor]:
        return self.encoder.parameters() + self.policy_head.parameters()

    def critic_parameters(self) -> t.List[Tensor]:
        return self.value_head.parameters()

    # Forward

    def encode_to_branch(self, obs: t.Union[Tensor, np.ndarray]) -> Tensor:
        return self.encoder.encode_to_branch(obs)

    def heads_from_branch(self, z: Tensor) -> t.Tuple[Categorical, Tensor]:
        """
        Policy and state value from branch-point features

        Returns:
            t.Tuple[Categorical, Tensor]: Action distribution, values of shape B
        """

        embedding = self.encoder.embed_from_branch(z)
        logits = self.policy_head(embedding)
        values = self.value_head(embedding)

        _check_finite(logits, "policy head")
        _check_finite(values, "value head")

        return Categorical(logits), values.reshape(-1)

    def forward(self, obs: t.Union[Tensor, np.ndarray]) -> t.Tuple[Categorical, Tensor]:
        return self.heads_from_branch(self.encode_to_branch(obs))

    def act(
            self,
            obs: np.ndarray,
            rng: t.Optional[np.random.Generator] = None
    ) -> t.Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Choose actions without recording (sampled with rng, mode otherwise)

        Returns:
            t.Tuple[np.ndarray, np.ndarray, np.ndarray]: actions, log probabilities, values
        """

        with no_grad():
            dist, values = self(obs)
            actions = dist.mode() if rng is None else dist.sample(rng)

            return actions, dist.log_prob(actions).numpy(), values.numpy()


class SACActorCritic(Module):
    """
    Encoder with twin Q heads, their target copies, a tanh-Gaussian actor and a learnable temperature
    """

    def __init__(
            self,
            obs_shape: t.Tuple[int, int, int],
            action_dim: int,
            rng: np.random.Generator,
            channels: t.Tuple[int, int, int] = (16, 32, 32),
            embedding_dim: int = 64,
            hidden: int = 128,
            alpha_init: float = 0.1
    ) -> None:
        self.action_dim = action_dim

        self.encoder = Encoder(obs_shape, rng, channels, embedding_dim)
        self.q_1 = MLP((embedding_dim + action_dim, hidden, hidden, 1), rng)
        self.q_2 = MLP((embedding_dim + action_dim, hidden, hidden, 1), rng)
        self.actor = MLP((embedding_dim, hidden, hidden, 2 * action_dim), rng, out_gain=0.01)
        self.log_alpha = Tensor(np.full((1, 1), np.log(alpha_init)), requires_grad=True)

        # Targets start as exact copies
        self.target_encoder = Encoder(obs_shape, rng, channels, embedding_dim)
        self.target_q_1 = MLP((embedding_dim + action_dim, hidden, hidden, 1), rng)
        self.target_q_2 = MLP((embedding_dim + action_dim, hidden, hidden, 1), rng)

        self.target_encoder.copy_from(self.encoder)
        self.target_q_1.copy_from(self.q_1)
        self.target_q_2.copy_from(self.q_2)

        logger.debug(f"SAC actor-critic with {self.num_parameters} parameters")

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha.data[0, 0]))

    @property
    def target_entropy(self) -> float:
        return -float(self.action_dim)

    # Parameter groups

    def critic_parameters(self) -> t.List[Tensor]:
        return self.encoder.parameters() + self.q_1.parameters() + self.q_2.parameters()

    def actor_parameters(self) -> t.List[Tensor]:
        return self.actor.parameters()

    def alpha_parameters(self) -> t.List[Tensor]:
        return [self.log_alpha]

    # Forward

    def encode_to_branch(self, obs: t.Union[Tensor, np.ndarray]) -> Tensor:
        return self.encoder.encode_to_branch(obs)

    def policy(self, embedding: Tensor) -> TanhGaussian:
        out = self.actor(embedding)
        _check_finite(out, "actor head")

        return TanhGaussian(out[:, :self.action_dim], out[:, self.action_dim:])

    def q_values(
            self,
            embedding: Tensor,
            actions: t.Union[Tensor, np.ndarray],
            target: bool = False
    ) -> t.Tuple[Tensor, Tensor]:
        """
        Twin Q estimates, each of shape B
        """

        inputs = concat([embedding, as_tensor(actions)], axis=1)
        q_1, q_2 = (self.target_q_1, self.target_q_2) if target else (self.q_1, self.q_2)

        return q_1(inputs).reshape(-1), q_2(inputs).reshape(-1)

    def value_proxy(self, embedding: Tensor) -> Tensor:
        """
        min Q(s, mean action), the state value seen by the actor
        """

        dist = self.policy(embedding)
        return minimum(*self.q_values(embedding, tanh(dist.mean)))

    def heads_from_branch(self, z: Tensor) -> t.Tuple[TanhGaussian, Tensor]:
        """
        Policy and embedding (the input of the Q heads) from branch-point features
        """

        embedding = self.encoder.embed_from_branch(z)
        return self.policy(embedding), embedding

    def target_embedding(self, obs: t.Union[Tensor, np.ndarray]) -> Tensor:
        return self.target_encoder(obs)

    def act(self, obs: np.ndarray, rng: t.Optional[np.random.Generator] = None) -> np.ndarray:
        """
        Squashed actions without recording (sampled with rng, mean otherwise)
        """

        with no_grad():
            dist, _ = self.heads_from_branch(self.encode_to_branch(obs))
            return dist.mode() if rng is None else dist.sample(rng)


__all__ = (
    "ConvBlock",
    "MLP",
    "Encoder",
    "PPOActorCritic",
    "SACActorCritic"
)
