"""Differentiable primitives over float64 numpy arrays.

Every primitive computes its forward value, rejects NaN/Inf, and, when a tape is active
and an input requires grad, records a vector-Jacobian closure.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from tensor_autodiff.tensor import Tensor, active_tape, as_tensor
from utils.errors import EmptyLossError, NonFiniteError, ShapeError
from utils.settings import settings

_GELU_C = math.sqrt(2.0 / math.pi)


def _result(op: str, array: np.ndarray, inputs: Sequence[Tensor], vjp) -> Tensor:
    if settings.check_finite and not np.isfinite(array).all():
        raise NonFiniteError(f"{op} produced NaN/Inf")
    out = Tensor._from_op(array)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(op, inputs, out, vjp)
    return out


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul dimension mismatch: {a.shape} x {b.shape}")
    try:
        out = np.matmul(a.data, b.data)
    except ValueError as e:
        raise ShapeError(f"matmul batch mismatch: {a.shape} x {b.shape}") from e

    def vjp(g):
        ga = unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape) if a.requires_grad else None
        gb = unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape) if b.requires_grad else None
        return ga, gb

    return _result("matmul", out, (a, b), vjp)


def _broadcast_pair(op: str, a: Tensor, b: Tensor) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise ShapeError(f"{op} cannot broadcast {a.shape} with {b.shape}") from e


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_pair("add", a, b)

    def vjp(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return _result("add", a.data + b.data, (a, b), vjp)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_pair("sub", a, b)

    def vjp(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return _result("sub", a.data - b.data, (a, b), vjp)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_pair("mul", a, b)

    def vjp(g):
        ga = unbroadcast(g * b.data, a.shape) if a.requires_grad else None
        gb = unbroadcast(g * a.data, b.shape) if b.requires_grad else None
        return ga, gb

    return _result("mul", a.data * b.data, (a, b), vjp)


def scale(x, factor: float) -> Tensor:
    x = as_tensor(x)

    def vjp(g):
        return (g * factor,)

    return _result("scale", x.data * factor, (x,), vjp)


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0

    def vjp(g):
        return (g * mask,)

    return _result("relu", np.where(mask, x.data, 0.0), (x,), vjp)


def gelu(x) -> Tensor:
    """tanh approximation of GELU."""
    x = as_tensor(x)
    inner = _GELU_C * (x.data + 0.044715 * x.data ** 3)
    t = np.tanh(inner)

    def vjp(g):
        d_inner = _GELU_C * (1.0 + 3.0 * 0.044715 * x.data ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * d_inner),)

    return _result("gelu", 0.5 * x.data * (1.0 + t), (x,), vjp)


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    if not -x.ndim <= axis < max(x.ndim, 1):
        raise ShapeError(f"softmax axis {axis} invalid for shape {x.shape}")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)

    def vjp(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _result("softmax", y, (x,), vjp)


def rms_norm(x, gain, epsilon: float = 1e-6) -> Tensor:
    x, gain = as_tensor(x), as_tensor(gain)
    if gain.ndim != 1 or gain.shape[0] != x.shape[-1]:
        raise ShapeError(f"rms_norm gain {gain.shape} does not match last dim of {x.shape}")
    n = x.shape[-1]
    rms = np.sqrt((x.data * x.data).mean(axis=-1, keepdims=True) + epsilon)
    normed = x.data / rms

    def vjp(g):
        g_normed = g * gain.data
        gx = None
        if x.requires_grad:
            gx = g_normed / rms - x.data * (g_normed * x.data).sum(axis=-1, keepdims=True) / (n * rms ** 3)
        ggain = (g * normed).reshape(-1, n).sum(axis=0) if gain.requires_grad else None
        return gx, ggain

    return _result("rms_norm", normed * gain.data, (x, gain), vjp)


def cross_entropy(logits, targets, ignore_index: int = -100) -> Tensor:
    """Mean negative log-likelihood over positions whose target is not `ignore_index`."""
    logits = as_tensor(logits)
    targets = np.asarray(targets, dtype=np.int64)
    vocab = logits.shape[-1]
    if targets.shape != logits.shape[:-1]:
        raise ShapeError(f"targets {targets.shape} do not match logits {logits.shape}")
    keep = targets != ignore_index
    count = int(keep.sum())
    if count == 0:
        raise EmptyLossError("every target position is ignored")
    live = targets[keep]
    if live.min() < 0 or live.max() >= vocab:
        raise ShapeError(f"target id out of range for vocab {vocab}")

    flat = logits.data.reshape(-1, vocab)
    flat_targets = np.where(keep, targets, 0).reshape(-1)
    flat_keep = keep.reshape(-1)
    peak = flat.max(axis=1, keepdims=True)
    shifted = flat - peak
    log_z = np.log(np.exp(shifted).sum(axis=1))
    picked = shifted[np.arange(flat.shape[0]), flat_targets]
    nll = (log_z - picked) * flat_keep
    loss = np.asarray(nll.sum() / count)

    def vjp(g):
        probs = np.exp(shifted - log_z[:, None])
        probs[np.arange(flat.shape[0]), flat_targets] -= 1.0
        probs *= flat_keep[:, None] * (float(g) / count)
        return (probs.reshape(logits.shape),)

    return _result("cross_entropy", loss, (logits,), vjp)


def embedding(table, ids) -> Tensor:
    table = as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    vocab = table.shape[0]
    if ids.size and (ids.min() < 0 or ids.max() >= vocab):
        raise ShapeError(f"token id {int(ids.max())} out of range for vocab {vocab}")

    def vjp(g):
        full = np.zeros_like(table.data)
        np.add.at(full, ids.reshape(-1), g.reshape(-1, table.shape[1]))
        return (full,)

    return _result("embedding", table.data[ids], (table,), vjp)


def reshape(x, shape: Tuple[int, ...]) -> Tensor:
    x = as_tensor(x)
    original = x.shape

    def vjp(g):
        return (g.reshape(original),)

    return _result("reshape", x.data.reshape(shape), (x,), vjp)


def transpose(x, axes: Optional[Tuple[int, ...]] = None) -> Tensor:
    x = as_tensor(x)
    axes = tuple(axes) if axes is not None else tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(axes))

    def vjp(g):
        return (np.transpose(g, inverse),)

    return _result("transpose", np.transpose(x.data, axes), (x,), vjp)


def concat(tensors: Sequence, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    try:
        out = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat shapes disagree: {[t.shape for t in tensors]}") from e
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def vjp(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _result("concat", out, tensors, vjp)


def sum(x) -> Tensor:  # noqa: A001
    x = as_tensor(x)

    def vjp(g):
        return (np.broadcast_to(g, x.shape).copy(),)

    return _result("sum", np.asarray(x.data.sum()), (x,), vjp)
