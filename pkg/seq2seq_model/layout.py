"""Canonical tensor table and parameter accounting.

Everything here works from shapes alone, so published-scale configs can be counted
without allocating them.
"""

from typing import Dict, List, Literal, Tuple

from seq2seq_model.schemas import ModelConfig, ModelWeights, StackPart

Shape = Tuple[int, ...]


def _attention(prefix: str, config: ModelConfig, with_bias: bool) -> List[Tuple[str, Shape]]:
    d, inner = config.d_model, config.inner_dim
    entries = [
        (f"{prefix}.q", (d, inner)),
        (f"{prefix}.k", (d, inner)),
        (f"{prefix}.v", (d, inner)),
        (f"{prefix}.o", (inner, d)),
    ]
    if with_bias:
        entries.append((f"{prefix}.rel_bias", (config.rel_pos_buckets, config.n_heads)))
    return entries


def _feed_forward(prefix: str, config: ModelConfig) -> List[Tuple[str, Shape]]:
    d, d_ff = config.d_model, config.d_ff
    entries = [(f"{prefix}.wi", (d, d_ff))]
    if config.gated:
        entries.append((f"{prefix}.wi_1", (d, d_ff)))
    entries.append((f"{prefix}.wo", (d_ff, d)))
    return entries


def encoder_layer_shapes(config: ModelConfig, index: int) -> List[Tuple[str, Shape]]:
    p = f"encoder.layers.{index}"
    return [
        *_attention(f"{p}.self_attn", config, with_bias=index == 0),
        (f"{p}.norm_attn", (config.d_model,)),
        *_feed_forward(f"{p}.ff", config),
        (f"{p}.norm_ff", (config.d_model,)),
    ]


def decoder_layer_shapes(config: ModelConfig, index: int) -> List[Tuple[str, Shape]]:
    p = f"decoder.layers.{index}"
    return [
        *_attention(f"{p}.self_attn", config, with_bias=index == 0),
        (f"{p}.norm_self", (config.d_model,)),
        *_attention(f"{p}.cross_attn", config, with_bias=False),
        (f"{p}.norm_cross", (config.d_model,)),
        *_feed_forward(f"{p}.ff", config),
        (f"{p}.norm_ff", (config.d_model,)),
    ]


def param_shapes(config: ModelConfig) -> List[Tuple[str, Shape]]:
    """Every tensor of the model in canonical (initialization and serialization) order."""
    entries: List[Tuple[str, Shape]] = [("shared.embedding", (config.vocab_size, config.d_model))]
    for i in range(config.n_enc_layers):
        entries.extend(encoder_layer_shapes(config, i))
    entries.append(("encoder.final_norm", (config.d_model,)))
    for i in range(config.n_dec_layers):
        entries.extend(decoder_layer_shapes(config, i))
    entries.append(("decoder.final_norm", (config.d_model,)))
    if not config.tie_embeddings:
        entries.append(("lm_head", (config.d_model, config.vocab_size)))
    return entries


def part_of(name: str) -> StackPart:
    if name.startswith("encoder."):
        return StackPart.ENCODER
    if name.startswith("decoder."):
        return StackPart.DECODER
    if name == "shared.embedding":
        return StackPart.EMBEDDING
    if name == "lm_head":
        return StackPart.HEAD
    raise KeyError(f"tensor {name} belongs to no stack part")


def _numel(shape: Shape) -> int:
    n = 1
    for dim in shape:
        n *= dim
    return n


def count_params(weights: ModelWeights, part: StackPart) -> int:
    """Exact element count of one disjoint part; parts sum to the total."""
    part = StackPart(part)
    return sum(t.size for name, t in weights.tensors.items() if part_of(name) == part)


def count_params_for_config(config: ModelConfig, part: StackPart) -> int:
    part = StackPart(part)
    return sum(_numel(shape) for name, shape in param_shapes(config) if part_of(name) == part)


def count_by_part(config: ModelConfig) -> Dict[StackPart, int]:
    return {part: count_params_for_config(config, part) for part in StackPart}


def layer_params(config: ModelConfig, stack: Literal["encoder", "decoder"], index: int = 1) -> int:
    """Parameters in one layer; index 0 also carries the stack's bias table."""
    shapes = encoder_layer_shapes(config, index) if stack == "encoder" else decoder_layer_shapes(config, index)
    return sum(_numel(shape) for _, shape in shapes)


def stack_ratio(config: ModelConfig, attribution: Literal["disjoint", "published"] = "disjoint") -> float:
    """Encoder:decoder parameter ratio.

    `disjoint` counts the stacks alone. `published` attributes the shared embedding
    to each stack, which is how released FLAN-T5 checkpoints report stack sizes.
    """
    enc = count_params_for_config(config, StackPart.ENCODER)
    dec = count_params_for_config(config, StackPart.DECODER)
    if attribution == "published":
        emb = count_params_for_config(config, StackPart.EMBEDDING)
        enc, dec = enc + emb, dec + emb
    return enc / dec
