# coding=utf-8

import threading
import typing as t
from abc import ABCMeta, abstractmethod
from contextlib import contextmanager

import numpy as np

from errors import ShapeError, TapeError


DTYPE = np.float64

ArrayLike = t.Union[np.ndarray, float, int, t.Sequence[t.Any]]
Grads = t.Tuple[t.Optional[np.ndarray], ...]


class GradTape:
    """
    Ordered record of executed differentiable operations
    """

    def __init__(self) -> None:
        self._nodes: t.List["Function"] = []
        self.enabled = True

    def record(self, node: "Function") -> None:
        """
        Append executed operation
        """

        self._nodes.append(node)

    def clear(self) -> None:
        """
        Drop all recorded operations (their outputs can't be differentiated anymore)
        """

        for node in self._nodes:
            node.released = True

        self._nodes.clear()

    def replay(self, loss: "Tensor") -> None:
        """
        Propagate gradients from loss through recorded operations in reverse order

        Args:
            loss (Tensor): Scalar output recorded on this tape
        """

        grads: t.Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}

        for node in reversed(self._nodes):
            # Gradient w.r.t. node output (None => output unreachable from loss)
            grad = grads.pop(id(node.output), None)

            if grad is None:
                continue

            for tensor, tensor_grad in zip(node.inputs, node.backward(grad)):
                if tensor_grad is None or not tensor.requires_grad:
                    continue

                tensor_grad = unbroadcast(tensor_grad, tensor.shape)

                if tensor.creator is None:
                    # Leaf => accumulate
                    tensor.grad = tensor_grad.copy() if tensor.grad is None else tensor.grad + tensor_grad

                elif id(tensor) in grads:
                    grads[id(tensor)] = grads[id(tensor)] + tensor_grad

                else:
                    grads[id(tensor)] = tensor_grad

    def __len__(self) -> int:
        return len(self._nodes)


_local = threading.local()


def get_tape() -> GradTape:
    """
    Get the tape of the current thread
    """

    tape = getattr(_local, "tape", None)

    if tape is None:
        # First use in this thread
        tape = _local.tape = GradTape()

    return tape


@contextmanager
def no_grad() -> t.Iterator[None]:
    """
    Disable recording inside the block
    """

    tape = get_tape()
    previous, tape.enabled = tape.enabled, False

    try:
        yield

    finally:
        tape.enabled = previous


def unbroadcast(grad: np.ndarray, shape: t.Tuple[int, ...]) -> np.ndarray:
    """
    Sum out broadcast dimensions so that grad matches shape

    Args:
        grad (np.ndarray): Gradient with broadcast shape
        shape (t.Tuple[int, ...]): Shape of the original operand

    Returns:
        np.ndarray: Gradient with given shape
    """

    if grad.shape == shape:
        return grad

    # Extra leading dimensions
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)

    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)

    return grad


class Function(metaclass=ABCMeta):
    """
    Base differentiable operation
    """

    def __init__(self, *inputs: "Tensor") -> None:
        self.inputs = inputs
        self.output: t.Optional["Tensor"] = None
        self.released = False

    @abstractmethod
    def forward(self, *arrays: np.ndarray, **kwargs: t.Any) -> np.ndarray:
        """
        Compute operation output from input arrays
        """

    @abstractmethod
    def backward(self, grad: np.ndarray) -> Grads:
        """
        Compute gradients w.r.t. every input from gradient w.r.t. output

        Args:
            grad (np.ndarray): dLoss/dOutput

        Returns:
            Grads: dLoss/dInput per input (None for non-differentiable inputs)
        """

    @classmethod
    def apply(cls, *inputs: t.Union["Tensor", ArrayLike], **kwargs: t.Any) -> "Tensor":
        """
        Run operation and record it on the tape when any input requires grad
        """

        tensors = tuple(as_tensor(value) for value in inputs)
        node = cls(*tensors)
        data = node.forward(*(tensor.data for tensor in tensors), **kwargs)

        tape = get_tape()
        requires_grad = tape.enabled and any(tensor.requires_grad for tensor in tensors)
        output = Tensor(data, requires_grad=requires_grad)

        if requires_grad:
            # Differentiable => record
            output.creator = node
            node.output = output
            tape.record(node)

        return output

    def __repr__(self) -> str:
        return f"<{type(self).__name__}>"


class Tensor:
    """
    Dense 64-bit tensor participating in reverse-mode differentiation
    """

    __slots__ = ("data", "requires_grad", "grad", "creator")

    # Let numpy defer binary operators to Tensor
    __array_priority__ = 100

    def __init__(self, data: ArrayLike, requires_grad: bool = False) -> None:
        """
        Initialize tensor

        Args:
            data (ArrayLike): Values (copied into a float64 row-major buffer if needed)
            requires_grad (bool): If True, gradients are accumulated into .grad
        """

        self.data: np.ndarray = np.ascontiguousarray(data, dtype=DTYPE)
        self.requires_grad = bool(requires_grad)
        self.grad: t.Optional[np.ndarray] = None
        self.creator: t.Optional[Function] = None

    # Properties

    @property
    def shape(self) -> t.Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        """
        Get value of a single-element tensor
        """

        if self.data.size != 1:
            raise ShapeError(f"item() requires a single element, got shape {self.shape}")

        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def detach(self) -> "Tensor":
        """
        Same values, cut from the tape
        """

        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        backward(self)

    # Operators

    def __add__(self, other: t.Union["Tensor", ArrayLike]) -> "Tensor":
        from .functional import add
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        from .functional import add
        return add(other, self)

    def __sub__(self, other: t.Union["Tensor", ArrayLike]) -> "Tensor":
        from .functional import sub
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        from .functional import sub
        return sub(other, self)

    def __mul__(self, other: t.Union["Tensor", ArrayLike]) -> "Tensor":
        from .functional import mul
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        from .functional import mul
        return mul(other, self)

    def __truediv__(self, other: t.Union["Tensor", ArrayLike]) -> "Tensor":
        from .functional import div
        return div(self, other)

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        from .functional import div
        return div(other, self)

    def __neg__(self) -> "Tensor":
        from .functional import neg
        return neg(self)

    def __pow__(self, exponent: float) -> "Tensor":
        from .functional import power
        return power(self, exponent)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from .functional import matmul
        return matmul(self, other)

    def __getitem__(self, index: t.Any) -> "Tensor":
        from .functional import take
        return take(self, index)

    # Reductions & shape

    def sum(self, axis: t.Optional[t.Union[int, t.Tuple[int, ...]]] = None, keepdims: bool = False) -> "Tensor":
        from .functional import sum as _sum
        return _sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: t.Optional[t.Union[int, t.Tuple[int, ...]]] = None, keepdims: bool = False) -> "Tensor":
        from .functional import mean
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: int) -> "Tensor":
        from .functional import reshape

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])

        return reshape(self, shape)

    def __repr__(self) -> str:
        grad = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor({np.array2string(self.data, precision=4, threshold=20)}{grad})"


def as_tensor(value: t.Union[Tensor, ArrayLike]) -> Tensor:
    """
    Wrap constant values into tensors
    """

    if isinstance(value, Tensor):
        return value

    return Tensor(value, requires_grad=False)


def backward(loss: Tensor) -> None:
    """
    Populate .grad of every leaf reachable from a scalar loss, then clear the tape

    Args:
        loss (Tensor): Scalar loss produced by operations on the current tape

    Raises:
        ShapeError: If loss is not a scalar
        TapeError: If loss was not recorded or its tape was already replayed
    """

    if loss.size != 1:
        # Non-scalar loss
        raise ShapeError(f"backward() requires a scalar loss, got shape {loss.shape}")

    if loss.creator is None:
        # Nothing recorded
        raise TapeError("loss has no recorded operations (leaf tensor or computed under no_grad)")

    if loss.creator.released:
        # Tape already replayed
        raise TapeError("tape for this loss was already replayed, run a fresh forward pass")

    tape = get_tape()

    if not len(tape):
        raise TapeError("tape is empty")

    try:
        tape.replay(loss)

    finally:
        tape.clear()


__all__ = (
    "DTYPE",
    "GradTape",
    "Function",
    "Tensor",
    "as_tensor",
    "backward",
    "get_tape",
    "no_grad",
    "unbroadcast"
)
