import logging
import math

import numpy as np

from seq2seq_model.layout import param_shapes
from seq2seq_model.schemas import ModelConfig, ModelWeights
from tensor_autodiff.tensor import Tensor
from utils.rng import make_rng

logger = logging.getLogger(__name__)


def init_std(name: str, shape, config: ModelConfig, fan_in: bool = False) -> float:
    if name == "shared.embedding":
        return 1.0
    if fan_in and not name.endswith(".rel_bias"):
        return 1.0 / math.sqrt(shape[0])
    return 1.0 / math.sqrt(config.d_model)


def init_model(config: ModelConfig, seed: int, *, fan_in: bool = False) -> ModelWeights:
    """Deterministic weights for (config, seed).

    Tensors are drawn in `param_shapes` order from one SFC64 generator:
    projections and bias tables ~ N(0, 1/d_model), embedding ~ N(0, 1),
    norm gains exactly 1.0 (no draw). `fan_in=True` scales each projection by
    its input width instead, which changes `o` and `wo`.
    """
    if not isinstance(config, ModelConfig):
        config = ModelConfig.from_mapping(config)
    rng = make_rng(seed)
    tensors = {}
    for name, shape in param_shapes(config):
        if len(shape) == 1:
            data = np.ones(shape, dtype=np.float64)
        else:
            data = rng.normal(0.0, init_std(name, shape, config, fan_in), size=shape)
        tensors[name] = Tensor(data, name=name)
    weights = ModelWeights(config=config, tensors=tensors)
    logger.debug(f"initialized {weights.total_params()} parameters with seed {seed} (fan_in={fan_in})")
    return weights
