# coding=utf-8

import typing as t

import numpy as np

from .core import Tensor, backward, no_grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """
    ||a - n|| / max(||a||, ||n||), 0 when both vanish
    """

    scale = max(float(np.linalg.norm(analytic)), float(np.linalg.norm(numeric)))

    if scale == 0.0:
        return 0.0

    return float(np.linalg.norm(analytic - numeric)) / scale


def numerical_grad(fn: t.Callable[[], Tensor], tensor: Tensor, h: float = 1e-5) -> np.ndarray:
    """
    Central-difference gradient of a scalar function w.r.t. one tensor

    Args:
        fn (t.Callable[[], Tensor]): Recomputes the scalar output from scratch
        tensor (Tensor): Input whose values are perturbed
        h (float): Step size

    Returns:
        np.ndarray: Estimated gradient, same shape as tensor
    """

    original = tensor.data
    grad = np.zeros_like(original)

    with no_grad():
        for index in np.ndindex(original.shape):
            shifted = original.copy()

            shifted[index] = original[index] + h
            tensor.data = shifted
            upper = fn().item()

            shifted[index] = original[index] - h
            lower = fn().item()

            grad[index] = (upper - lower) / (2.0 * h)

    tensor.data = original
    return grad


def gradcheck(
        fn: t.Callable[[], Tensor],
        inputs: t.Sequence[Tensor],
        h: float = 1e-5,
        rtol: float = 1e-4
) -> t.List[float]:
    """
    Compare autodiff gradients with central differences

    Args:
        fn (t.Callable[[], Tensor]): Builds a scalar loss from inputs
        inputs (t.Sequence[Tensor]): Tensors (requires_grad=True) to check
        h (float): Finite-difference step
        rtol (float): Accepted relative error

    Returns:
        t.List[float]: Relative error per input

    Raises:
        AssertionError: If any input exceeds rtol
    """

    for tensor in inputs:
        tensor.grad = None

    backward(fn())
    analytic = [np.zeros_like(tensor.data) if tensor.grad is None else tensor.grad.copy() for tensor in inputs]

    errors = [
        relative_error(grad, numerical_grad(fn, tensor, h))
        for grad, tensor in zip(analytic, inputs)
    ]

    for position, error in enumerate(errors):
        if error >= rtol:
            raise AssertionError(
                f"gradient mismatch for input {position} (shape {inputs[position].shape}): "
                f"relative error {error:.3e} >= {rtol:.0e}"
            )

    return errors


__all__ = (
    "gradcheck",
    "numerical_grad",
    "relative_error"
)
