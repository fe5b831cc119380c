# coding=utf-8

import math
import typing as t

import numpy as np

from errors import ShapeError

from . import functional as F
from .core import Tensor


class Module:
    """
    Container of parameter tensors and sub-modules
    """

    def forward(self, *args: t.Any, **kwargs: t.Any) -> t.Any:
        raise NotImplementedError(f"{type(self).__name__} does not define forward()")

    def __call__(self, *args: t.Any, **kwargs: t.Any) -> t.Any:
        return self.forward(*args, **kwargs)

    def named_parameters(self, prefix: str = "") -> t.Dict[str, Tensor]:
        """
        Get parameters keyed by dotted attribute path, in declaration order
        """

        params: t.Dict[str, Tensor] = {}

        for name, value in vars(self).items():
            key = f"{prefix}{name}"

            if isinstance(value, Tensor) and value.requires_grad:
                # Own parameter
                params[key] = value

            elif isinstance(value, Module):
                params.update(value.named_parameters(key + "."))

            elif isinstance(value, (list, tuple)):
                for index, item in enumerate(value):
                    if isinstance(item, Module):
                        params.update(item.named_parameters(f"{key}.{index}."))

        return params

    def parameters(self) -> t.List[Tensor]:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.grad = None

    @property
    def num_parameters(self) -> int:
        return int(sum(param.size for param in self.parameters()))

    def state_dict(self) -> t.Dict[str, np.ndarray]:
        """
        Copy of every parameter array
        """

        return {name: param.data.copy() for name, param in self.named_parameters().items()}

    def load_state_dict(self, state: t.Mapping[str, np.ndarray]) -> None:
        """
        Replace parameter values

        Raises:
            KeyError: If a parameter is missing from state
            ShapeError: If a stored array has a different shape
        """

        for name, param in self.named_parameters().items():
            if name not in state:
                raise KeyError(f"missing parameter {name!r}")

            value = np.asarray(state[name], dtype=np.float64)

            if value.shape != param.shape:
                raise ShapeError(f"parameter {name!r} has shape {param.shape}, stored {value.shape}")

            param.data = value.copy()
            param.grad = None

    def copy_from(self, other: "Module") -> None:
        self.load_state_dict(other.state_dict())


def _uniform(rng: np.random.Generator, shape: t.Tuple[int, ...], bound: float) -> Tensor:
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


class Linear(Module):
    """
    Affine layer x @ W + b
    """

    def __init__(
            self,
            in_features: int,
            out_features: int,
            rng: np.random.Generator,
            gain: float = 1.0,
            zero_init: bool = False
    ) -> None:
        """
        Initialize affine layer

        Args:
            in_features (int): Input width
            out_features (int): Output width
            rng (np.random.Generator): Initialization stream
            gain (float): Scale of the uniform fan-in bound
            zero_init (bool): If True, weights start at zero
        """

        self.in_features, self.out_features = in_features, out_features
        bound = gain * math.sqrt(3.0 / in_features)

        if zero_init:
            self.weight = Tensor(np.zeros((in_features, out_features)), requires_grad=True)

        else:
            self.weight = _uniform(rng, (in_features, out_features), bound)

        self.bias = Tensor(np.zeros((1, out_features)), requires_grad=True)

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeError(f"Linear({self.in_features}, {self.out_features}) got input of shape {x.shape}")

        return F.matmul(x, self.weight) + self.bias


class Conv2d(Module):
    """
    Convolution layer with bias
    """

    def __init__(
            self,
            in_channels: int,
            out_channels: int,
            kernel_size: int,
            rng: np.random.Generator,
            stride: int = 1,
            padding: int = 0,
            gain: float = math.sqrt(2.0)
    ) -> None:
        self.stride, self.padding = stride, padding

        fan_in = in_channels * kernel_size * kernel_size
        bound = gain * math.sqrt(3.0 / fan_in)

        self.weight = _uniform(rng, (out_channels, in_channels, kernel_size, kernel_size), bound)
        self.bias = Tensor(np.zeros((1, out_channels, 1, 1)), requires_grad=True)

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(x, self.weight, stride=self.stride, padding=self.padding) + self.bias


__all__ = (
    "Module",
    "Linear",
    "Conv2d"
)
