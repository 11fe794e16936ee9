from utils.threads import pin_blas_threads

pin_blas_threads(1)

import math  # noqa: E402
from typing import Dict, List  # noqa: E402

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from seq2seq_model.init import init_model  # noqa: E402
from seq2seq_model.schemas import BOS_ID, EOS_ID, PAD_ID, ModelConfig, ModelWeights  # noqa: E402


@pytest.fixture
def tiny_config() -> ModelConfig:
    return ModelConfig(
        d_model=8, n_heads=2, d_kv=4, d_ff=16, n_enc_layers=1, n_dec_layers=1,
        vocab_size=16, rel_pos_buckets=8, rel_pos_max_distance=16,
    )


@pytest.fixture
def small_config() -> ModelConfig:
    return ModelConfig(
        d_model=16, n_heads=2, d_kv=8, d_ff=32, n_enc_layers=6, n_dec_layers=6,
        vocab_size=24, rel_pos_buckets=8, rel_pos_max_distance=16,
    )


@pytest.fixture
def small_weights(small_config) -> ModelWeights:
    return init_model(small_config, seed=7)


def build_chain_model(chains: Dict[int, List[int]], vocab_size: int = 16, cycle: bool = False) -> ModelWeights:
    """Model whose greedy output is scripted per single-token source.

    `chains[s]` is the exact token sequence emitted for source `[s]`. With `cycle`, the
    last token of each chain leads back to its first, so the chain never ends on its own.
    Works by making every block an identity on the residual stream except cross-attention,
    which adds half of the source's one-hot so the first step can be steered.
    """
    v = vocab_size
    config = ModelConfig(
        d_model=v, n_heads=1, d_kv=v, d_ff=4, n_enc_layers=1, n_dec_layers=1,
        vocab_size=v, tie_embeddings=False,
    )
    weights = init_model(config, seed=0)
    t = weights.tensors
    t["shared.embedding"].data[...] = np.eye(v)
    for name in t:
        if name.endswith(".o") or name.endswith(".ff.wo"):
            t[name].data[...] = 0.0
    t["decoder.layers.0.cross_attn.v"].data[...] = np.eye(v)
    t["decoder.layers.0.cross_attn.o"].data[...] = np.eye(v) * (0.5 / math.sqrt(v))
    head = np.zeros((v, v))
    for source, chain in chains.items():
        head[source, chain[0]] = 1.0
        for current, following in zip(chain, chain[1:]):
            head[current, following] = 1.0
        if cycle and chain[-1] != EOS_ID:
            head[chain[-1], chain[0]] = 1.0
    head[BOS_ID] = 0.0
    head[PAD_ID] = 0.0
    t["lm_head"].data[...] = head
    return weights


@pytest.fixture
def chain_model():
    return build_chain_model
