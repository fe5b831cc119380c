# coding=utf-8

import math
import typing as t

import numpy as np

from .core import Tensor


def clip_grad_norm(params: t.Iterable[Tensor], max_norm: float) -> float:
    """
    Scale gradients in place so that their global L2 norm is at most max_norm

    Args:
        params (t.Iterable[Tensor]): Parameters with populated grads
        max_norm (float): Norm limit

    Returns:
        float: Global norm before clipping
    """

    params = [param for param in params if param.grad is not None]
    total = math.sqrt(sum(float(np.sum(param.grad * param.grad)) for param in params))

    if max_norm > 0 and total > max_norm:
        scale = max_norm / (total + 1e-6)

        for param in params:
            param.grad = param.grad * scale

    return total


class Adam:
    """
    Adam optimizer over a fixed parameter group
    """

    def __init__(
            self,
            params: t.Iterable[Tensor],
            lr: float,
            betas: t.Tuple[float, float] = (0.9, 0.999),
            eps: float = 1e-8,
            max_grad_norm: float = 0.0
    ) -> None:
        """
        Initialize optimizer

        Args:
            params (t.Iterable[Tensor]): Parameters updated by this optimizer
            lr (float): Learning rate
            betas (t.Tuple[float, float]): Moment decay rates
            eps (float): Denominator guard
            max_grad_norm (float): Global gradient norm clip (0 = off)
        """

        self.params = list(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.max_grad_norm = max_grad_norm

        self.steps = 0
        self._m = [np.zeros_like(param.data) for param in self.params]
        self._v = [np.zeros_like(param.data) for param in self.params]

    def step(self) -> float:
        """
        Apply one update from the current grads (parameters without grad are skipped)

        Returns:
            float: Global gradient norm before clipping
        """

        norm = clip_grad_norm(self.params, self.max_grad_norm)

        self.steps += 1
        beta_1, beta_2 = self.betas
        correction_1 = 1.0 - beta_1 ** self.steps
        correction_2 = 1.0 - beta_2 ** self.steps

        for index, param in enumerate(self.params):
            if param.grad is None:
                continue

            self._m[index] = beta_1 * self._m[index] + (1.0 - beta_1) * param.grad
            self._v[index] = beta_2 * self._v[index] + (1.0 - beta_2) * param.grad * param.grad

            m_hat = self._m[index] / correction_1
            v_hat = self._v[index] / correction_2

            param.data = param.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

        return norm


__all__ = (
    "Adam",
    "clip_grad_norm"
)
