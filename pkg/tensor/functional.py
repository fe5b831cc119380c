# coding=utf-8

import typing as t

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from errors import NumericError, ShapeError

from .core import ArrayLike, Function, Grads, Tensor, as_tensor


Axis = t.Optional[t.Union[int, t.Tuple[int, ...]]]
Operand = t.Union[Tensor, ArrayLike]


def _broadcast_shape(a: np.ndarray, b: np.ndarray) -> t.Tuple[int, ...]:
    """
    Check operands broadcast against each other
    """

    try:
        return np.broadcast_shapes(a.shape, b.shape)

    except ValueError:
        # Incompatible
        raise ShapeError(f"cannot broadcast shapes {a.shape} and {b.shape}")


# Elementwise binary


class Add(Function):

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _broadcast_shape(a, b)
        return a + b

    def backward(self, grad: np.ndarray) -> Grads:
        return grad, grad


class Sub(Function):

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _broadcast_shape(a, b)
        return a - b

    def backward(self, grad: np.ndarray) -> Grads:
        return grad, -grad


class Mul(Function):

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _broadcast_shape(a, b)
        self.a, self.b = a, b
        return a * b

    def backward(self, grad: np.ndarray) -> Grads:
        return grad * self.b, grad * self.a


class Div(Function):

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _broadcast_shape(a, b)
        self.a, self.b = a, b
        return a / b

    def backward(self, grad: np.ndarray) -> Grads:
        return grad / self.b, -grad * self.a / (self.b * self.b)


class Minimum(Function):
    """
    Elementwise minimum (ties route the gradient to the first operand)
    """

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        _broadcast_shape(a, b)
        self.first = a <= b
        return np.where(self.first, a, b)

    def backward(self, grad: np.ndarray) -> Grads:
        return grad * self.first, grad * ~self.first


# Elementwise unary


class Neg(Function):

    def forward(self, x: np.ndarray) -> np.ndarray:
        return -x

    def backward(self, grad: np.ndarray) -> Grads:
        return -grad,


class Power(Function):

    def forward(self, x: np.ndarray, exponent: float = 2.0) -> np.ndarray:
        self.x, self.exponent = x, float(exponent)
        return x ** self.exponent

    def backward(self, grad: np.ndarray) -> Grads:
        return grad * self.exponent * self.x ** (self.exponent - 1.0),


class ReLU(Function):

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.mask = x > 0
        return np.where(self.mask, x, 0.0)

    def backward(self, grad: np.ndarray) -> Grads:
        return grad * self.mask,


class Tanh(Function):

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.y = np.tanh(x)
        return self.y

    def backward(self, grad: np.ndarray) -> Grads:
        return grad * (1.0 - self.y * self.y),


class Exp(Function):

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.y = np.exp(x)
        return self.y

    def backward(self, grad: np.ndarray) -> Grads:
        return grad * self.y,


class Log(Function):

    def forward(self, x: np.ndarray) -> np.ndarray:
        if np.any(~(x > 0)):
            # Domain violation (also catches NaN)
            raise NumericError(f"log of non-positive value (min {np.min(x)!r})")

        self.x = x
        return np.log(x)

    def backward(self, grad: np.ndarray) -> Grads:
        return grad / self.x,


class Softplus(Function):

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.x = x
        return np.logaddexp(0.0, x)

    def backward(self, grad: np.ndarray) -> Grads:
        # Logistic sigmoid, stable for both signs
        sigmoid = np.exp(-np.logaddexp(0.0, -self.x))
        return grad * sigmoid,


class Sqrt(Function):

    def forward(self, x: np.ndarray) -> np.ndarray:
        if np.any(x < 0):
            raise NumericError(f"sqrt of negative value (min {x.min()!r})")

        self.y = np.sqrt(x)
        return self.y

    def backward(self, grad: np.ndarray) -> Grads:
        return grad / (2.0 * self.y),


class Clip(Function):
    """
    Clamp into [low, high], zero gradient outside
    """

    def forward(self, x: np.ndarray, low: float = -np.inf, high: float = np.inf) -> np.ndarray:
        self.mask = (x >= low) & (x <= high)
        return np.clip(x, low, high)

    def backward(self, grad: np.ndarray) -> Grads:
        return grad * self.mask,


# Linear algebra


class MatMul(Function):

    def forward(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.ndim != 2 or b.ndim != 2:
            raise ShapeError(f"matmul expects 2-D operands, got shapes {a.shape} and {b.shape}")

        if a.shape[1] != b.shape[0]:
            # Inner dimension mismatch
            raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")

        self.a, self.b = a, b
        return a @ b

    def backward(self, grad: np.ndarray) -> Grads:
        return grad @ self.b.T, self.a.T @ grad


class Conv2d(Function):
    """
    2-D cross-correlation via im2col
    """

    def forward(self, x: np.ndarray, w: np.ndarray, stride: int = 1, padding: int = 0) -> np.ndarray:
        if x.ndim != 4 or w.ndim != 4:
            raise ShapeError(f"conv2d expects 4-D input and kernel, got {x.shape} and {w.shape}")

        batch, channels, height, width = x.shape
        out_channels, in_channels, k_h, k_w = w.shape

        if in_channels != channels:
            raise ShapeError(f"conv2d channel mismatch: input {x.shape}, kernel {w.shape}")

        if stride < 1 or padding < 0:
            raise ShapeError(f"conv2d needs stride >= 1 and padding >= 0, got {stride}, {padding}")

        padded_h, padded_w = height + 2 * padding, width + 2 * padding

        if k_h > padded_h or k_w > padded_w:
            # Kernel does not fit
            raise ShapeError(f"conv2d kernel {w.shape} larger than padded input {(padded_h, padded_w)}")

        x_pad = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
        windows = sliding_window_view(x_pad, (k_h, k_w), axis=(2, 3))[:, :, ::stride, ::stride]
        out_h, out_w = windows.shape[2], windows.shape[3]

        # (B * OH * OW, C * KH * KW)
        cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(batch * out_h * out_w, channels * k_h * k_w)
        kernel = w.reshape(out_channels, -1)

        self.cols, self.kernel = cols, kernel
        self.x_shape, self.w_shape = x.shape, w.shape
        self.stride, self.padding = stride, padding
        self.out_hw = out_h, out_w

        out = cols @ kernel.T
        return np.ascontiguousarray(out.reshape(batch, out_h, out_w, out_channels).transpose(0, 3, 1, 2))

    def backward(self, grad: np.ndarray) -> Grads:
        batch, channels, height, width = self.x_shape
        out_channels, _, k_h, k_w = self.w_shape
        out_h, out_w = self.out_hw
        stride, padding = self.stride, self.padding

        grad_rows = grad.transpose(0, 2, 3, 1).reshape(-1, out_channels)
        grad_w = (grad_rows.T @ self.cols).reshape(self.w_shape)

        grad_cols = (grad_rows @ self.kernel).reshape(batch, out_h, out_w, channels, k_h, k_w)
        grad_pad = np.zeros((batch, channels, height + 2 * padding, width + 2 * padding))

        for i in range(k_h):
            for j in range(k_w):
                grad_pad[
                    :, :,
                    i:i + stride * (out_h - 1) + 1:stride,
                    j:j + stride * (out_w - 1) + 1:stride
                ] += grad_cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)

        grad_x = grad_pad[:, :, padding:padding + height, padding:padding + width]
        return grad_x, grad_w


# Reductions and shape


class Sum(Function):

    def forward(self, x: np.ndarray, axis: Axis = None, keepdims: bool = False) -> np.ndarray:
        self.shape, self.axis, self.keepdims = x.shape, axis, keepdims
        return np.asarray(x.sum(axis=axis, keepdims=keepdims))

    def backward(self, grad: np.ndarray) -> Grads:
        if self.axis is not None and not self.keepdims:
            # Restore reduced axes
            axes = (self.axis, ) if isinstance(self.axis, int) else self.axis
            axes = tuple(sorted(axis % len(self.shape) for axis in axes))
            grad = np.expand_dims(grad, axes)

        return np.broadcast_to(grad, self.shape).copy(),


class Reshape(Function):

    def forward(self, x: np.ndarray, shape: t.Tuple[int, ...] = ()) -> np.ndarray:
        self.shape = x.shape

        try:
            return x.reshape(shape)

        except ValueError:
            raise ShapeError(f"cannot reshape {x.shape} into {tuple(shape)}")

    def backward(self, grad: np.ndarray) -> Grads:
        return grad.reshape(self.shape),


class Take(Function):
    """
    Basic or integer-array indexing (gradients of repeated indices accumulate)
    """

    def forward(self, x: np.ndarray, index: t.Any = None) -> np.ndarray:
        self.shape, self.index = x.shape, index
        return np.array(x[index])

    def backward(self, grad: np.ndarray) -> Grads:
        grad_x = np.zeros(self.shape)
        np.add.at(grad_x, self.index, grad)
        return grad_x,


class Concat(Function):

    def forward(self, *arrays: np.ndarray, axis: int = 0) -> np.ndarray:
        try:
            out = np.concatenate(arrays, axis=axis)

        except ValueError:
            raise ShapeError(f"cannot concatenate shapes {[array.shape for array in arrays]} on axis {axis}")

        self.splits = np.cumsum([array.shape[axis] for array in arrays])[:-1]
        self.axis = axis
        return out

    def backward(self, grad: np.ndarray) -> Grads:
        return tuple(np.split(grad, self.splits, axis=self.axis))


class Softmax(Function):

    def forward(self, x: np.ndarray) -> np.ndarray:
        shifted = np.exp(x - x.max(axis=-1, keepdims=True))
        self.y = shifted / shifted.sum(axis=-1, keepdims=True)
        return self.y

    def backward(self, grad: np.ndarray) -> Grads:
        return self.y * (grad - (grad * self.y).sum(axis=-1, keepdims=True)),


class LogSoftmax(Function):

    def forward(self, x: np.ndarray) -> np.ndarray:
        shifted = x - x.max(axis=-1, keepdims=True)
        y = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
        self.probs = np.exp(y)
        return y

    def backward(self, grad: np.ndarray) -> Grads:
        return grad - self.probs * grad.sum(axis=-1, keepdims=True),


# Functional interface


def add(a: Operand, b: Operand) -> Tensor:
    return Add.apply(a, b)


def sub(a: Operand, b: Operand) -> Tensor:
    return Sub.apply(a, b)


def mul(a: Operand, b: Operand) -> Tensor:
    return Mul.apply(a, b)


def div(a: Operand, b: Operand) -> Tensor:
    return Div.apply(a, b)


def minimum(a: Operand, b: Operand) -> Tensor:
    return Minimum.apply(a, b)


def neg(x: Operand) -> Tensor:
    return Neg.apply(x)


def power(x: Operand, exponent: float) -> Tensor:
    return Power.apply(x, exponent=exponent)


def square(x: Operand) -> Tensor:
    x = as_tensor(x)
    return Mul.apply(x, x)


def relu(x: Operand) -> Tensor:
    return ReLU.apply(x)


def tanh(x: Operand) -> Tensor:
    return Tanh.apply(x)


def exp(x: Operand) -> Tensor:
    return Exp.apply(x)


def log(x: Operand) -> Tensor:
    return Log.apply(x)


def softplus(x: Operand) -> Tensor:
    return Softplus.apply(x)


def sqrt(x: Operand) -> Tensor:
    return Sqrt.apply(x)


def clip(x: Operand, low: float = -np.inf, high: float = np.inf) -> Tensor:
    return Clip.apply(x, low=low, high=high)


def matmul(a: Operand, b: Operand) -> Tensor:
    return MatMul.apply(a, b)


def conv2d(x: Operand, w: Operand, stride: int = 1, padding: int = 0) -> Tensor:
    """
    2-D cross-correlation of x (B x Cin x H x W) with w (Cout x Cin x kH x kW)

    Output spatial size is floor((H + 2 * padding - kH) / stride) + 1

    Raises:
        ShapeError: If channels differ or the kernel is larger than the padded input
    """

    return Conv2d.apply(x, w, stride=int(stride), padding=int(padding))


def sum(x: Operand, axis: Axis = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    return Sum.apply(x, axis=axis, keepdims=keepdims)


def mean(x: Operand, axis: Axis = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)

    if axis is None:
        count = x.size

    else:
        axes = (axis, ) if isinstance(axis, int) else axis
        count = int(np.prod([x.shape[a] for a in axes]))

    return Sum.apply(x, axis=axis, keepdims=keepdims) * (1.0 / count)


def reshape(x: Operand, shape: t.Sequence[int]) -> Tensor:
    return Reshape.apply(x, shape=tuple(shape))


def flatten(x: Operand) -> Tensor:
    """
    Keep the batch dimension, flatten the rest
    """

    x = as_tensor(x)
    return Reshape.apply(x, shape=(x.shape[0], -1))


def take(x: Operand, index: t.Any) -> Tensor:
    return Take.apply(x, index=index)


def concat(tensors: t.Sequence[Operand], axis: int = 0) -> Tensor:
    return Concat.apply(*tensors, axis=axis)


def avg_pool2d(x: Operand, size: int = 2) -> Tensor:
    """
    Non-overlapping average pooling (spatial dims must be divisible by size)
    """

    x = as_tensor(x)
    batch, channels, height, width = x.shape

    if height % size or width % size:
        raise ShapeError(f"avg_pool2d({size}) needs spatial dims divisible by {size}, got {x.shape}")

    blocks = reshape(x, (batch, channels, height // size, size, width // size, size))
    return mean(blocks, axis=(3, 5))


def _check_finite(x: Tensor, name: str) -> None:
    if not np.all(np.isfinite(x.data)):
        raise NumericError(f"{name} received non-finite values")


def softmax_logits_to_probs(logits: Operand) -> Tensor:
    """
    Row-wise softmax with max subtraction

    Raises:
        NumericError: If logits contain NaN or Inf
    """

    logits = as_tensor(logits)
    _check_finite(logits, "softmax")

    return Softmax.apply(logits)


def log_softmax(logits: Operand) -> Tensor:
    logits = as_tensor(logits)
    _check_finite(logits, "log_softmax")

    return LogSoftmax.apply(logits)


def channel_stats(z: Operand, eps: float = 1e-5) -> t.Tuple[Tensor, Tensor]:
    """
    Per-sample, per-channel mean and standard deviation over spatial dimensions

    Population variance (divisor H * W); sigma = sqrt(var + eps).

    Args:
        z (Operand): Feature map B x C x H x W
        eps (float): Variance guard for constant channels

    Returns:
        t.Tuple[Tensor, Tensor]: mu and sigma, both B x C
    """

    z = as_tensor(z)

    if z.ndim != 4:
        raise ShapeError(f"channel_stats expects a B x C x H x W map, got shape {z.shape}")

    batch, channels = z.shape[:2]

    mu = mean(z, axis=(2, 3))
    centered = z - reshape(mu, (batch, channels, 1, 1))
    var = mean(square(centered), axis=(2, 3))

    return mu, sqrt(var + eps)


__all__ = (
    "add",
    "sub",
    "mul",
    "div",
    "minimum",
    "neg",
    "power",
    "square",
    "relu",
    "tanh",
    "exp",
    "log",
    "softplus",
    "sqrt",
    "clip",
    "matmul",
    "conv2d",
    "sum",
    "mean",
    "reshape",
    "flatten",
    "take",
    "concat",
    "avg_pool2d",
    "softmax_logits_to_probs",
    "log_softmax",
    "channel_stats"
)
