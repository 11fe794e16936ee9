"""Forward passes: encoder, cached single-step decoder, and full teacher-forced decoder.

Layers are pre-norm (RMS) with residual connections. Attention logits are scaled by
1/sqrt(d_kv) and receive a relative position bias shared by every layer of a stack;
the bias table lives in that stack's layer 0. Masked positions get an additive -1e9.
"""

import math
from typing import List, Optional, Tuple

import numpy as np

from seq2seq_model.position import position_bias
from seq2seq_model.schemas import ModelConfig, ModelWeights
from tensor_autodiff import ops
from tensor_autodiff.tensor import Tensor
from utils.errors import CacheMismatchError, ShapeError

MASK_VALUE = -1e9


def key_padding_mask(pad_mask: Optional[np.ndarray], batch: int, length: int) -> Optional[np.ndarray]:
    """Additive mask broadcastable to batch x heads x query x key; `pad_mask` is True on real tokens."""
    if pad_mask is None:
        return None
    pad_mask = np.asarray(pad_mask, dtype=bool)
    if pad_mask.shape != (batch, length):
        raise ShapeError(f"pad mask {pad_mask.shape} does not match tokens {(batch, length)}")
    return np.where(pad_mask, 0.0, MASK_VALUE)[:, None, None, :]


def causal_mask(length: int) -> np.ndarray:
    upper = np.triu(np.ones((length, length), dtype=bool), k=1)
    return np.where(upper, MASK_VALUE, 0.0)[None, None, :, :]


def _split_heads(x: Tensor, config: ModelConfig) -> Tensor:
    batch, length, _ = x.shape
    return ops.transpose(ops.reshape(x, (batch, length, config.n_heads, config.d_kv)), (0, 2, 1, 3))


def _merge_heads(x: Tensor, config: ModelConfig) -> Tensor:
    batch, _, length, _ = x.shape
    return ops.reshape(ops.transpose(x, (0, 2, 1, 3)), (batch, length, config.inner_dim))


def _attend(q: Tensor, k: Tensor, v: Tensor, config: ModelConfig, bias: Optional[Tensor], mask: Optional[np.ndarray]) -> Tensor:
    scores = ops.scale(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(config.d_kv))
    if bias is not None:
        scores = ops.add(scores, bias)
    if mask is not None:
        scores = ops.add(scores, mask)
    return ops.matmul(ops.softmax(scores, axis=-1), v)


def _project(weights: ModelWeights, prefix: str, x: Tensor) -> Tensor:
    return _split_heads(ops.matmul(x, weights[prefix]), weights.config)


def _self_attention(weights, prefix, x, bias, mask) -> Tensor:
    cfg = weights.config
    q = _project(weights, f"{prefix}.q", x)
    k = _project(weights, f"{prefix}.k", x)
    v = _project(weights, f"{prefix}.v", x)
    return ops.matmul(_merge_heads(_attend(q, k, v, cfg, bias, mask), cfg), weights[f"{prefix}.o"])


def _feed_forward(weights: ModelWeights, prefix: str, x: Tensor) -> Tensor:
    hidden = ops.matmul(x, weights[f"{prefix}.wi"])
    if weights.config.gated:
        hidden = ops.mul(ops.gelu(hidden), ops.matmul(x, weights[f"{prefix}.wi_1"]))
    else:
        hidden = ops.relu(hidden)
    return ops.matmul(hidden, weights[f"{prefix}.wo"])


def _norm(weights: ModelWeights, name: str, x: Tensor) -> Tensor:
    return ops.rms_norm(x, weights[name], weights.config.norm_eps)


def _lm_head(weights: ModelWeights, hidden: Tensor) -> Tensor:
    cfg = weights.config
    if cfg.tie_embeddings:
        scaled = ops.scale(hidden, cfg.d_model ** -0.5)
        return ops.matmul(scaled, ops.transpose(weights["shared.embedding"], (1, 0)))
    return ops.matmul(hidden, weights["lm_head"])


def _check_tokens(token_ids: np.ndarray, name: str) -> np.ndarray:
    token_ids = np.asarray(token_ids, dtype=np.int64)
    if token_ids.ndim != 2 or token_ids.shape[0] == 0 or token_ids.shape[1] == 0:
        raise ShapeError(f"{name} must be a non-empty batch x length array, got {token_ids.shape}")
    return token_ids


def encode(weights: ModelWeights, token_ids, pad_mask=None) -> Tensor:
    """One full encoder pass: batch x src_len -> batch x src_len x d_model."""
    cfg = weights.config
    token_ids = _check_tokens(token_ids, "token_ids")
    batch, length = token_ids.shape
    if length > cfg.max_input_len:
        raise ShapeError(f"source length {length} exceeds max_input_len {cfg.max_input_len}")
    mask = key_padding_mask(pad_mask, batch, length)

    h = ops.embedding(weights["shared.embedding"], token_ids)
    bias = position_bias(
        weights["encoder.layers.0.self_attn.rel_bias"], length, length,
        bidirectional=True, max_distance=cfg.rel_pos_max_distance,
    )
    for i in range(cfg.n_enc_layers):
        p = f"encoder.layers.{i}"
        h = ops.add(h, _self_attention(weights, f"{p}.self_attn", _norm(weights, f"{p}.norm_attn", h), bias, mask))
        h = ops.add(h, _feed_forward(weights, f"{p}.ff", _norm(weights, f"{p}.norm_ff", h)))
    return _norm(weights, "encoder.final_norm", h)


class DecoderCache:
    """Per-layer self-attention keys/values grown one step at a time, plus cross-attention
    keys/values projected from the encoder output on first use."""

    def __init__(self, n_layers: int, batch: int):
        self.n_layers = n_layers
        self.batch = batch
        self.length = 0
        self.self_k: List[Optional[Tensor]] = [None] * n_layers
        self.self_v: List[Optional[Tensor]] = [None] * n_layers
        self.cross_k: List[Optional[Tensor]] = [None] * n_layers
        self.cross_v: List[Optional[Tensor]] = [None] * n_layers

    @classmethod
    def empty(cls, config: ModelConfig, batch: int) -> "DecoderCache":
        return cls(config.n_dec_layers, batch)

    def validate(self, config: ModelConfig, batch: int, source_len: int) -> None:
        if self.n_layers != config.n_dec_layers:
            raise CacheMismatchError(f"cache has {self.n_layers} layers, model has {config.n_dec_layers}")
        if self.batch != batch:
            raise CacheMismatchError(f"cache batch {self.batch} != step batch {batch}")
        expected_self = (batch, config.n_heads, self.length, config.d_kv)
        expected_cross = (batch, config.n_heads, source_len, config.d_kv)
        for i in range(self.n_layers):
            for name, entry, expected in (
                ("self_k", self.self_k[i], expected_self),
                ("self_v", self.self_v[i], expected_self),
                ("cross_k", self.cross_k[i], expected_cross),
                ("cross_v", self.cross_v[i], expected_cross),
            ):
                if entry is None:
                    if name.startswith("self") and self.length > 0:
                        raise CacheMismatchError(f"layer {i} {name} missing after {self.length} steps")
                    continue
                if entry.shape != expected:
                    raise CacheMismatchError(f"layer {i} {name} shape {entry.shape} != expected {expected}")


def decode_step(
    weights: ModelWeights,
    encoder_hidden: Tensor,
    cache: Optional[DecoderCache],
    new_token,
    encoder_mask=None,
) -> Tuple[Tensor, DecoderCache]:
    """Feed one token per sequence; returns next-token logits (batch x vocab) and the grown cache."""
    cfg = weights.config
    tokens = np.asarray(new_token, dtype=np.int64).reshape(-1)
    batch = tokens.shape[0]
    if encoder_hidden.ndim != 3 or encoder_hidden.shape[0] != batch:
        raise ShapeError(f"encoder hidden {encoder_hidden.shape} does not match batch {batch}")
    source_len = encoder_hidden.shape[1]
    if cache is None:
        cache = DecoderCache.empty(cfg, batch)
    cache.validate(cfg, batch, source_len)
    cross_mask = key_padding_mask(encoder_mask, batch, source_len)
    position = cache.length

    h = ops.embedding(weights["shared.embedding"], tokens[:, None])
    bias = position_bias(
        weights["decoder.layers.0.self_attn.rel_bias"], 1, position + 1,
        bidirectional=False, max_distance=cfg.rel_pos_max_distance, query_offset=position,
    )
    for i in range(cfg.n_dec_layers):
        p = f"decoder.layers.{i}"
        x = _norm(weights, f"{p}.norm_self", h)
        q = _project(weights, f"{p}.self_attn.q", x)
        k = _project(weights, f"{p}.self_attn.k", x)
        v = _project(weights, f"{p}.self_attn.v", x)
        if cache.self_k[i] is not None:
            k = ops.concat([cache.self_k[i], k], axis=2)
            v = ops.concat([cache.self_v[i], v], axis=2)
        cache.self_k[i], cache.self_v[i] = k, v
        attn = _merge_heads(_attend(q, k, v, cfg, bias, None), cfg)
        h = ops.add(h, ops.matmul(attn, weights[f"{p}.self_attn.o"]))

        x = _norm(weights, f"{p}.norm_cross", h)
        if cache.cross_k[i] is None:
            cache.cross_k[i] = _project(weights, f"{p}.cross_attn.k", encoder_hidden)
            cache.cross_v[i] = _project(weights, f"{p}.cross_attn.v", encoder_hidden)
        q = _project(weights, f"{p}.cross_attn.q", x)
        attn = _merge_heads(_attend(q, cache.cross_k[i], cache.cross_v[i], cfg, None, cross_mask), cfg)
        h = ops.add(h, ops.matmul(attn, weights[f"{p}.cross_attn.o"]))

        h = ops.add(h, _feed_forward(weights, f"{p}.ff", _norm(weights, f"{p}.norm_ff", h)))

    h = _norm(weights, "decoder.final_norm", h)
    logits = _lm_head(weights, h)
    cache.length += 1
    return ops.reshape(logits, (batch, cfg.vocab_size)), cache


def decode_full(weights: ModelWeights, encoder_hidden: Tensor, decoder_ids, encoder_mask=None) -> Tensor:
    """Uncached decoder over a whole prefix with causal self-attention: batch x len x vocab."""
    cfg = weights.config
    decoder_ids = _check_tokens(decoder_ids, "decoder_ids")
    batch, length = decoder_ids.shape
    if encoder_hidden.ndim != 3 or encoder_hidden.shape[0] != batch:
        raise ShapeError(f"encoder hidden {encoder_hidden.shape} does not match batch {batch}")
    cross_mask = key_padding_mask(encoder_mask, batch, encoder_hidden.shape[1])
    self_mask = causal_mask(length)

    h = ops.embedding(weights["shared.embedding"], decoder_ids)
    bias = position_bias(
        weights["decoder.layers.0.self_attn.rel_bias"], length, length,
        bidirectional=False, max_distance=cfg.rel_pos_max_distance,
    )
    for i in range(cfg.n_dec_layers):
        p = f"decoder.layers.{i}"
        h = ops.add(h, _self_attention(weights, f"{p}.self_attn", _norm(weights, f"{p}.norm_self", h), bias, self_mask))
        x = _norm(weights, f"{p}.norm_cross", h)
        q = _project(weights, f"{p}.cross_attn.q", x)
        k = _project(weights, f"{p}.cross_attn.k", encoder_hidden)
        v = _project(weights, f"{p}.cross_attn.v", encoder_hidden)
        attn = _merge_heads(_attend(q, k, v, cfg, None, cross_mask), cfg)
        h = ops.add(h, ops.matmul(attn, weights[f"{p}.cross_attn.o"]))
        h = ops.add(h, _feed_forward(weights, f"{p}.ff", _norm(weights, f"{p}.norm_ff", h)))
    return _lm_head(weights, _norm(weights, "decoder.final_norm", h))


def forward(weights: ModelWeights, src_ids, src_mask, decoder_ids) -> Tensor:
    """Teacher-forced logits: encode the source, then run the full decoder over `decoder_ids`."""
    hidden = encode(weights, src_ids, src_mask)
    return decode_full(weights, hidden, decoder_ids, src_mask)


def shift_right(summaries: List[List[int]], bos_id: int, eos_id: int, pad_id: int, ignore_index: int = -100) -> Tuple[np.ndarray, np.ndarray]:
    """Decoder inputs `[bos] + summary` and targets `summary + [eos]`, right-padded."""
    if not summaries:
        raise ShapeError("no summaries to shift")
    length = max(len(s) for s in summaries) + 1
    inputs = np.full((len(summaries), length), pad_id, dtype=np.int64)
    targets = np.full((len(summaries), length), ignore_index, dtype=np.int64)
    for row, summary in enumerate(summaries):
        inputs[row, 0] = bos_id
        inputs[row, 1:len(summary) + 1] = summary
        targets[row, :len(summary)] = summary
        targets[row, len(summary)] = eos_id
    return inputs, targets


def pad_batch(sequences: List[List[int]], pad_id: int, max_len: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Right-pad to the longest sequence (truncating at `max_len`); returns ids and a real-token mask."""
    if not sequences:
        raise ShapeError("empty batch")
    lengths = [min(len(s), max_len) if max_len else len(s) for s in sequences]
    if min(lengths) == 0:
        raise ShapeError("batch contains an empty sequence")
    width = max(lengths)
    ids = np.full((len(sequences), width), pad_id, dtype=np.int64)
    mask = np.zeros((len(sequences), width), dtype=bool)
    for row, (seq, n) in enumerate(zip(sequences, lengths)):
        ids[row, :n] = seq[:n]
        mask[row, :n] = True
    return ids, mask
