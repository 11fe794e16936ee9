"""Tensor values and the tape that records primitive applications.

A `Tape` is entered as a context manager; while it is active, every primitive whose
inputs require gradients appends a node. `backward` walks those nodes once, newest first.
"""

import threading
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import NonFiniteError, ShapeError, TapeError

_local = threading.local()

VJP = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "name", "is_leaf")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        array = np.array(data, dtype=np.float64)
        if not np.isfinite(array).all():
            raise NonFiniteError(f"tensor {name or '<unnamed>'} holds NaN/Inf values")
        self.data = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.is_leaf = True

    @classmethod
    def _from_op(cls, array: np.ndarray) -> "Tensor":
        out = cls.__new__(cls)
        out.data = array
        out.requires_grad = False
        out.grad = None
        out.name = None
        out.is_leaf = False
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), requires_grad=False, name=self.name)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        from tensor_autodiff import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from tensor_autodiff import ops
        return ops.sub(self, other)

    def __mul__(self, other):
        from tensor_autodiff import ops
        if isinstance(other, (int, float)):
            return ops.scale(self, float(other))
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        from tensor_autodiff import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from tensor_autodiff import ops
        return ops.matmul(self, other)


def as_tensor(value) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


class Node:
    __slots__ = ("op", "inputs", "output", "vjp")

    def __init__(self, op: str, inputs: Sequence[Tensor], output: Tensor, vjp: VJP):
        self.op = op
        self.inputs = tuple(inputs)
        self.output = output
        self.vjp = vjp


class Tape:
    """Ordered record of primitive applications, innermost active tape per thread."""

    def __init__(self):
        self.nodes: List[Node] = []

    def __enter__(self) -> "Tape":
        stack = _tape_stack()
        stack.append(self)
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def record(self, op: str, inputs: Sequence[Tensor], output: Tensor, vjp: VJP) -> None:
        self.nodes.append(Node(op, inputs, output, vjp))

    def __len__(self) -> int:
        return len(self.nodes)


class no_grad:
    """Suspend recording on this thread."""

    def __enter__(self):
        stack = _tape_stack()
        stack.append(None)
        return self

    def __exit__(self, exc_type, exc, tb):
        _tape_stack().pop()


def _tape_stack() -> list:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def active_tape() -> Optional[Tape]:
    stack = _tape_stack()
    return stack[-1] if stack else None


def backward(tape: Tape, loss: Tensor, params: Optional[Iterable[Tensor]] = None) -> None:
    """Accumulate d(loss)/d(leaf) into `.grad` of every reachable leaf.

    Parameters listed in `params` that the loss does not reach get a zero gradient.
    """
    if loss.ndim != 0:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise TapeError("loss was not produced on the tape from any tensor requiring grad")

    grads: Dict[int, np.ndarray] = {id(loss): np.ones((), dtype=np.float64)}
    leaves: Dict[int, Tensor] = {}
    if loss.is_leaf:
        leaves[id(loss)] = loss

    for node in reversed(tape.nodes):
        upstream = grads.pop(id(node.output), None)
        if upstream is None:
            continue
        input_grads = node.vjp(upstream)
        for tensor, grad in zip(node.inputs, input_grads):
            if grad is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            grads[key] = grads[key] + grad if key in grads else grad
            if tensor.is_leaf:
                leaves[key] = tensor

    for key, tensor in leaves.items():
        grad = grads.get(key)
        if grad is None:
            continue
        grad = np.array(grad, dtype=np.float64)
        tensor.grad = grad if tensor.grad is None else tensor.grad + grad

    for param in params or ():
        if param.grad is None:
            param.grad = np.zeros_like(param.data)
