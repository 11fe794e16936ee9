from typing import Callable, Dict, Sequence

import numpy as np

from tensor_autodiff.tensor import Tape, Tensor, backward, no_grad


def analytic_grads(fn: Callable[..., Tensor], inputs: Sequence[Tensor]) -> Dict[int, np.ndarray]:
    for t in inputs:
        t.requires_grad = True
        t.grad = None
    with Tape() as tape:
        loss = fn(*inputs)
    backward(tape, loss, params=inputs)
    return {i: t.grad.copy() for i, t in enumerate(inputs)}


def numeric_grads(fn: Callable[..., Tensor], inputs: Sequence[Tensor], h: float = 1e-5) -> Dict[int, np.ndarray]:
    """Central differences, one element at a time."""
    out: Dict[int, np.ndarray] = {}
    with no_grad():
        for i, t in enumerate(inputs):
            grad = np.zeros_like(t.data)
            flat = t.data.reshape(-1)
            gflat = grad.reshape(-1)
            for j in range(flat.size):
                original = flat[j]
                flat[j] = original + h
                plus = fn(*inputs).item()
                flat[j] = original - h
                minus = fn(*inputs).item()
                flat[j] = original
                gflat[j] = (plus - minus) / (2.0 * h)
            out[i] = grad
    return out


def gradcheck(fn: Callable[..., Tensor], inputs: Sequence[Tensor], h: float = 1e-5) -> float:
    """Largest per-input relative error ||a - n|| / (||a|| + ||n||) between analytic and numeric grads."""
    analytic = analytic_grads(fn, inputs)
    numeric = numeric_grads(fn, inputs, h=h)
    worst = 0.0
    for i in analytic:
        a, n = analytic[i], numeric[i]
        denom = np.linalg.norm(a) + np.linalg.norm(n)
        err = 0.0 if denom == 0 else float(np.linalg.norm(a - n) / denom)
        worst = max(worst, err)
    return worst
