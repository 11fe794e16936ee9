"""Layer removal for encoder and decoder stacks.

Retained layers are copied bit-for-bit and renumbered from 0. The relative position
bias table always belongs to layer 0 of a stack, so it moves to whichever layer
becomes the new first one.
"""

import logging
from typing import Dict, List, Tuple

from seq2seq_model.layout import param_shapes
from seq2seq_model.schemas import ModelConfig, ModelWeights
from structural_pruning.schemas import PruneSpec, RetentionStrategy
from tensor_autodiff.tensor import Tensor
from utils.digest import mapping_digest
from utils.errors import PruneSpecError

logger = logging.getLogger(__name__)

_BIAS_SUFFIX = "self_attn.rel_bias"


def select_layers(total: int, keep: int, strategy: RetentionStrategy = RetentionStrategy.EVENLY_SPACED) -> List[int]:
    """Indices of the `keep` layers retained out of `total`, strictly increasing.

    EvenlySpaced takes round_half_up(i * (total - 1) / (keep - 1)), so the first and
    last layers always survive; keep == 1 retains layer 0.
    """
    if total < 1:
        raise PruneSpecError(f"stack has no layers (total={total})")
    if keep < 1 or keep > total:
        raise PruneSpecError(f"keep must be in [1, {total}], got {keep}")
    strategy = RetentionStrategy(strategy)
    if strategy == RetentionStrategy.FIRST_K:
        return list(range(keep))
    if strategy == RetentionStrategy.LAST_K:
        return list(range(total - keep, total))
    if keep == 1:
        return [0]
    span = 2 * (keep - 1)
    return [(2 * i * (total - 1) + (keep - 1)) // span for i in range(keep)]


def retained_layers(spec: PruneSpec, config: ModelConfig) -> Tuple[List[int], List[int]]:
    validate_spec(spec, config)
    return (
        select_layers(config.n_enc_layers, spec.enc_keep, spec.strategy),
        select_layers(config.n_dec_layers, spec.dec_keep, spec.strategy),
    )


def validate_spec(spec: PruneSpec, config: ModelConfig) -> None:
    if not 1 <= spec.enc_keep <= config.n_enc_layers:
        raise PruneSpecError(f"enc_keep {spec.enc_keep} outside [1, {config.n_enc_layers}]")
    if not 1 <= spec.dec_keep <= config.n_dec_layers:
        raise PruneSpecError(f"dec_keep {spec.dec_keep} outside [1, {config.n_dec_layers}]")


def _copy(tensor: Tensor, name: str) -> Tensor:
    return Tensor(tensor.data.copy(), name=name)


def _copy_stack(weights: ModelWeights, stack: str, kept: List[int], out: Dict[str, Tensor]) -> None:
    bias_name = f"{stack}.layers.0.{_BIAS_SUFFIX}"
    for new_index, old_index in enumerate(kept):
        old_prefix = f"{stack}.layers.{old_index}."
        new_prefix = f"{stack}.layers.{new_index}."
        for name, tensor in weights.tensors.items():
            if not name.startswith(old_prefix) or name.endswith(_BIAS_SUFFIX):
                continue
            renamed = new_prefix + name[len(old_prefix):]
            out[renamed] = _copy(tensor, renamed)
        if new_index == 0:
            out[bias_name] = _copy(weights[bias_name], bias_name)
    out[f"{stack}.final_norm"] = _copy(weights[f"{stack}.final_norm"], f"{stack}.final_norm")


def prune(weights: ModelWeights, spec: PruneSpec) -> ModelWeights:
    """Smaller model with only the retained layers; embeddings and head untouched."""
    enc_kept, dec_kept = retained_layers(spec, weights.config)
    config = ModelConfig(**{
        **weights.config.model_dump(),
        "n_enc_layers": spec.enc_keep,
        "n_dec_layers": spec.dec_keep,
    })
    staged: Dict[str, Tensor] = {"shared.embedding": _copy(weights["shared.embedding"], "shared.embedding")}
    _copy_stack(weights, "encoder", enc_kept, staged)
    _copy_stack(weights, "decoder", dec_kept, staged)
    if "lm_head" in weights.tensors:
        staged["lm_head"] = _copy(weights["lm_head"], "lm_head")

    ordered = {}
    for name, shape in param_shapes(config):
        tensor = staged[name]
        if tensor.shape != shape:
            raise PruneSpecError(f"{name} has shape {tensor.shape}, expected {shape}")
        ordered[name] = tensor
    logger.info(
        f"Pruned {weights.config.n_enc_layers}+{weights.config.n_dec_layers} -> "
        f"{spec.enc_keep}+{spec.dec_keep} layers (enc {enc_kept}, dec {dec_kept}, {spec.strategy.value})"
    )
    return ModelWeights(config=config, tensors=ordered)


def enumerate_grid(n_layers: int) -> List[PruneSpec]:
    """Baseline, then decoder-only, encoder-only and symmetric pruning, deepest first."""
    if n_layers < 2:
        raise PruneSpecError(f"grid needs at least 2 layers per stack, got {n_layers}")
    n = n_layers
    shrinking = range(n - 1, 0, -1)
    shapes = [(n, n)]
    shapes += [(n, k) for k in shrinking]
    shapes += [(k, n) for k in shrinking]
    shapes += [(k, k) for k in shrinking]
    return [PruneSpec(enc_keep=e, dec_keep=d) for e, d in shapes]


def layer_digest(weights: ModelWeights, stack: str, index: int) -> str:
    """Digest of one layer's tensors under layer-relative names, excluding the bias table."""
    prefix = f"{stack}.layers.{index}."
    arrays = {
        name[len(prefix):]: tensor.data
        for name, tensor in weights.tensors.items()
        if name.startswith(prefix) and not name.endswith(_BIAS_SUFFIX)
    }
    if not arrays:
        raise PruneSpecError(f"{stack} has no layer {index}")
    return mapping_digest(arrays)
