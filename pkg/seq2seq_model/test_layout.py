import numpy as np
import pytest

from seq2seq_model.Config import PUBLISHED_PRESETS, PUBLISHED_RATIOS, build_config
from seq2seq_model.init import init_model
from seq2seq_model.layout import count_params, count_params_for_config, layer_params, param_shapes, stack_ratio
from seq2seq_model.schemas import ModelConfig, StackPart
from utils.errors import ConfigError


def oracle_counts(cfg: ModelConfig):
    """Independent hand enumeration of every declared tensor."""
    d, inner, ff, h, b = cfg.d_model, cfg.n_heads * cfg.d_kv, cfg.d_ff, cfg.n_heads, cfg.rel_pos_buckets
    ff_mats = (3 if cfg.ff_activation == "gated-gelu" else 2) * d * ff
    attn = 4 * d * inner
    enc_layer = attn + ff_mats + 2 * d
    dec_layer = 2 * attn + ff_mats + 3 * d
    return {
        StackPart.ENCODER: cfg.n_enc_layers * enc_layer + b * h + d,
        StackPart.DECODER: cfg.n_dec_layers * dec_layer + b * h + d,
        StackPart.EMBEDDING: cfg.vocab_size * d,
        StackPart.HEAD: 0 if cfg.tie_embeddings else d * cfg.vocab_size,
    }


def test_tiny_count_matches_shape_enumeration(tiny_config):
    weights = init_model(tiny_config, seed=0)
    oracle = oracle_counts(tiny_config)
    for part in StackPart:
        assert count_params(weights, part) == oracle[part]
    assert sum(oracle.values()) == weights.total_params()
    assert sum(count_params(weights, part) for part in StackPart) == weights.total_params()


@pytest.mark.parametrize("overrides", [
    {},
    {"tie_embeddings": False},
    {"ff_activation": "gated-gelu", "n_enc_layers": 3, "n_dec_layers": 2},
    {"n_heads": 3, "d_kv": 5},
])
def test_config_counts_match_oracle(tiny_config, overrides):
    cfg = ModelConfig(**{**tiny_config.model_dump(), **overrides})
    oracle = oracle_counts(cfg)
    for part in StackPart:
        assert count_params_for_config(cfg, part) == oracle[part]
    weights = init_model(cfg, seed=1)
    assert {name: t.shape for name, t in weights.tensors.items()} == dict(param_shapes(cfg))


def test_decoder_layer_always_heavier(tiny_config, small_config):
    for cfg in (tiny_config, small_config, build_config("flan-t5-small")):
        assert layer_params(cfg, "decoder") > layer_params(cfg, "encoder")
        assert stack_ratio(cfg) < 1
        assert stack_ratio(cfg, "published") < 1


@pytest.mark.parametrize("preset", sorted(PUBLISHED_PRESETS))
def test_published_ratios_within_tolerance(preset):
    cfg = build_config(preset)
    assert stack_ratio(cfg, attribution="published") == pytest.approx(PUBLISHED_RATIOS[preset], abs=0.03)


def test_flan_small_stack_sizes():
    cfg = build_config("flan-t5-small")
    emb = count_params_for_config(cfg, StackPart.EMBEDDING)
    assert emb == 32128 * 512
    assert count_params_for_config(cfg, StackPart.ENCODER) + emb == 35_332_800
    assert count_params_for_config(cfg, StackPart.DECODER) + emb == 41_628_352


def test_invalid_config_names_field(tiny_config):
    with pytest.raises(ConfigError) as err:
        ModelConfig(**{**tiny_config.model_dump(), "n_dec_layers": 0})
    assert err.value.field == "n_dec_layers"
    with pytest.raises(ConfigError) as err:
        ModelConfig.from_mapping({**tiny_config.model_dump(), "vocab_size": 3})
    assert err.value.field == "vocab_size"
    with pytest.raises(ConfigError) as err:
        ModelConfig.from_mapping({**tiny_config.model_dump(), "d_model": "wide"})
    assert err.value.field == "d_model"


def test_init_is_deterministic_and_norms_are_one(tiny_config):
    a = init_model(tiny_config, seed=3)
    b = init_model(tiny_config, seed=3)
    c = init_model(tiny_config, seed=4)
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    for name, tensor in a.tensors.items():
        if "norm" in name:
            assert (tensor.data == 1.0).all()


def family_values(weights):
    families = {}
    for name, tensor in weights.tensors.items():
        family = "norm" if "norm" in name else name.rsplit(".", 1)[-1]
        families.setdefault(family, []).append(tensor.data.ravel())
    return {family: np.concatenate(parts) for family, parts in families.items()}


@pytest.fixture(scope="module")
def wide_config():
    return ModelConfig(
        d_model=64, n_heads=4, d_kv=32, d_ff=256, n_enc_layers=2, n_dec_layers=2,
        vocab_size=64, rel_pos_buckets=32, rel_pos_max_distance=64,
    )


@pytest.mark.parametrize("fan_in", [False, True])
def test_init_std_per_tensor_family(wide_config, fan_in):
    weights = init_model(wide_config, seed=21, fan_in=fan_in)
    values = family_values(weights)
    projection = 1.0 / np.sqrt(64)
    expected = {
        "embedding": 1.0,
        "q": projection, "k": projection, "v": projection, "wi": projection,
        "o": 1.0 / np.sqrt(128) if fan_in else projection,
        "wo": 1.0 / np.sqrt(256) if fan_in else projection,
    }
    for family, std in expected.items():
        assert values[family].std() == pytest.approx(std, rel=0.05), family
        assert abs(values[family].mean()) < 4 * std / np.sqrt(values[family].size), family
    # 256 draws only, so the tolerance is looser.
    assert values["rel_bias"].std() == pytest.approx(projection, rel=0.15)
    assert (values["norm"] == 1.0).all()
