import logging
from typing import Dict, Mapping, Optional

import numpy as np

from tensor_autodiff.schemas import OptimizerConfig
from tensor_autodiff.tensor import Tensor
from utils.errors import OptimizerError

logger = logging.getLogger(__name__)


class OptimizerState:
    """Per-parameter first/second moments plus the shared step counter."""

    def __init__(self, config: OptimizerConfig, first: Dict[str, np.ndarray], second: Dict[str, np.ndarray]):
        self.config = config
        self.first = first
        self.second = second
        self.step = 0

    @classmethod
    def create(cls, params: Mapping[str, Tensor], config: Optional[OptimizerConfig] = None) -> "OptimizerState":
        config = config or OptimizerConfig()
        first = {name: np.zeros_like(p.data) for name, p in params.items()}
        second = {name: np.zeros_like(p.data) for name, p in params.items()}
        return cls(config, first, second)


def optimizer_step(
    params: Mapping[str, Tensor],
    grads: Optional[Mapping[str, np.ndarray]],
    state: OptimizerState,
) -> Mapping[str, Tensor]:
    """Apply one Adam update with decoupled weight decay, in place.

    `grads` defaults to each parameter's `.grad`. Every gradient is validated
    before any parameter moves.
    """
    resolved: Dict[str, np.ndarray] = {}
    for name, param in params.items():
        grad = grads[name] if grads is not None else param.grad
        if grad is None:
            raise OptimizerError("missing gradient", name)
        if grad.shape != param.data.shape:
            raise OptimizerError(f"gradient shape {grad.shape} != parameter shape {param.data.shape}", name)
        if not np.isfinite(grad).all():
            raise OptimizerError("gradient holds NaN/Inf", name)
        if name not in state.first:
            raise OptimizerError("parameter unknown to optimizer state", name)
        resolved[name] = grad

    cfg = state.config
    state.step += 1
    t = state.step
    correction1 = 1.0 - cfg.beta1 ** t
    correction2 = 1.0 - cfg.beta2 ** t

    for name, param in params.items():
        grad = resolved[name]
        m = state.first[name]
        v = state.second[name]
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * grad
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * grad * grad
        if cfg.weight_decay:
            param.data -= cfg.learning_rate * cfg.weight_decay * param.data
        param.data -= cfg.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + cfg.epsilon)

    logger.debug(f"optimizer step {t} over {len(resolved)} tensors")
    return params
