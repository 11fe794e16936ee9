import logging

import numpy as np
import pytest

from generation_engine.engine import generate, generate_in_batches, generate_uncached, mean_genl, strip_generated
from generation_engine.schemas import GenerationConfig, GenerationTrace
from seq2seq_model.init import init_model
from seq2seq_model.schemas import EOS_ID, PAD_ID, ModelConfig
from structural_pruning.pruning import prune
from structural_pruning.schemas import PruneSpec
from utils.errors import ConfigError, GenerationError
from utils.rng import make_rng


def test_chain_model_follows_script(chain_model):
    weights = chain_model({10: [5, 6, 7, EOS_ID]})
    result = generate(weights, [[10]], GenerationConfig(max_new_tokens=10))
    assert result.sequences == [[5, 6, 7, EOS_ID]]
    assert result.trace.genl == [4]
    assert result.summaries() == [[5, 6, 7]]


def test_immediate_eos_is_one_step(chain_model):
    weights = chain_model({10: [EOS_ID]})
    result = generate(weights, [[10]], GenerationConfig(max_new_tokens=10))
    assert result.trace.steps == 1
    assert result.trace.genl == [1]
    assert result.summaries() == [[]]


def test_step_cap_without_eos(chain_model):
    weights = chain_model({10: [5, 6, 7]}, cycle=True)
    result = generate(weights, [[10]], GenerationConfig(max_new_tokens=9))
    assert result.trace.steps == 9
    assert result.trace.genl == [9]
    assert result.sequences == [[5, 6, 7, 5, 6, 7, 5, 6, 7]]


def test_finished_sequences_emit_pad_until_batch_ends(chain_model):
    weights = chain_model({10: [5, 6, EOS_ID], 11: [7, 8, 9, 12, 13, 14, EOS_ID]})
    result = generate(weights, [[10], [11]], GenerationConfig(max_new_tokens=20))
    assert result.trace.steps == 7
    assert len(result.trace.decoder_times) == 7
    assert result.trace.genl == [3, 7]
    assert result.sequences[0] == [5, 6, EOS_ID, PAD_ID, PAD_ID, PAD_ID, PAD_ID]
    assert result.sequences[1] == [7, 8, 9, 12, 13, 14, EOS_ID]


def test_forced_lengths_suppress_then_force_eos(chain_model):
    weights = chain_model({10: [5, 6, EOS_ID], 11: [7, EOS_ID]})
    result = generate(weights, [[10], [11]], GenerationConfig(max_new_tokens=20), forced_lengths=[5, 1])
    assert result.trace.genl == [5, 1]
    assert result.trace.steps == 5
    assert result.sequences[0] == [5, 6, 5, 6, EOS_ID]
    assert result.sequences[1] == [EOS_ID, PAD_ID, PAD_ID, PAD_ID, PAD_ID]


def test_forced_lengths_validated(chain_model):
    weights = chain_model({10: [EOS_ID]})
    cfg = GenerationConfig(max_new_tokens=4)
    with pytest.raises(GenerationError):
        generate(weights, [[10]], cfg, forced_lengths=[5])
    with pytest.raises(GenerationError):
        generate(weights, [[10]], cfg, forced_lengths=[0])
    with pytest.raises(GenerationError):
        generate(weights, [[10]], cfg, forced_lengths=[1, 1])


def test_empty_inputs_rejected(small_weights):
    with pytest.raises(GenerationError):
        generate(small_weights, [])
    with pytest.raises(GenerationError):
        generate(small_weights, [[5], []])


def test_config_invariants():
    with pytest.raises(ConfigError):
        GenerationConfig(max_new_tokens=0)
    with pytest.raises(ConfigError):
        GenerationConfig(eos_id=0, pad_id=0)


CACHE_CASES = [
    {"n_enc_layers": 2, "n_dec_layers": 2},
    {"n_enc_layers": 3, "n_dec_layers": 1},
    {"n_enc_layers": 1, "n_dec_layers": 4},
    {"n_enc_layers": 2, "n_dec_layers": 3, "ff_activation": "gated-gelu", "tie_embeddings": False},
    {"n_enc_layers": 1, "n_dec_layers": 1, "n_heads": 4, "d_kv": 4},
]


def cache_models(small_config, small_weights):
    models = [
        init_model(ModelConfig(**{**small_config.model_dump(), **case}), seed=60 + i) for i, case in enumerate(CACHE_CASES)
    ]
    models += [init_model(ModelConfig(**{**small_config.model_dump(), **CACHE_CASES[3]}), seed=70)]
    for enc, dec in ((6, 2), (2, 6), (1, 1), (4, 3)):
        models.append(prune(small_weights, PruneSpec(enc_keep=enc, dec_keep=dec)))
    return models


def test_cached_matches_uncached(small_config, small_weights):
    models = cache_models(small_config, small_weights)
    assert len(models) == 10
    rng = make_rng(40)
    cfg = GenerationConfig(max_new_tokens=6)
    pairs = 0
    for weights in models:
        vocab = weights.config.vocab_size
        for _ in range(5):
            source = [rng.integers(4, vocab, size=int(rng.integers(2, 12))).tolist()]
            cached = generate(weights, source, cfg, capture_logits=True)
            uncached = generate_uncached(weights, source, cfg, capture_logits=True)
            assert cached.sequences == uncached.sequences
            assert cached.trace.genl == uncached.trace.genl
            assert len(cached.step_logits) == len(uncached.step_logits)
            for a, b in zip(cached.step_logits, uncached.step_logits):
                assert np.max(np.abs(a - b)) <= 1e-9
            pairs += 1
    assert pairs == 50


def test_cached_matches_uncached_in_batches(small_weights):
    rng = make_rng(41)
    vocab = small_weights.config.vocab_size
    cfg = GenerationConfig(max_new_tokens=6)
    for _ in range(4):
        batch = [rng.integers(4, vocab, size=int(rng.integers(2, 10))).tolist() for _ in range(5)]
        cached = generate(small_weights, batch, cfg, capture_logits=True)
        uncached = generate_uncached(small_weights, batch, cfg, capture_logits=True)
        assert cached.sequences == uncached.sequences
        for a, b in zip(cached.step_logits, uncached.step_logits):
            assert np.allclose(a, b, atol=1e-9, rtol=0)


def test_batched_rows_match_single_generation(small_weights):
    rng = make_rng(41)
    vocab = small_weights.config.vocab_size
    batch = [rng.integers(4, vocab, size=n).tolist() for n in (3, 7, 5)]
    cfg = GenerationConfig(max_new_tokens=5)
    together = generate(small_weights, batch, cfg).summaries()
    alone = [generate(small_weights, [seq], cfg).summaries()[0] for seq in batch]
    assert together == alone


def test_trace_timings_are_recorded(small_weights):
    result = generate(small_weights, [[5, 6, 7], [8, 9]], GenerationConfig(max_new_tokens=3))
    trace = result.trace
    assert trace.encoder_time > 0
    assert all(t > 0 for t in trace.decoder_times)
    record = trace.to_record()
    assert len(record["decoder_us"]) == trace.steps
    assert record["genl"] == trace.genl


def test_generate_in_batches_slices_workload(small_weights):
    inputs = [[5, 6], [7], [8, 9, 10], [11], [12, 13]]
    results = generate_in_batches(small_weights, inputs, GenerationConfig(max_new_tokens=2), batch_size=2)
    assert [len(r.sequences) for r in results] == [2, 2, 1]
    with pytest.raises(GenerationError):
        generate_in_batches(small_weights, inputs, GenerationConfig(), batch_size=0)


def test_mean_genl():
    traces = [GenerationTrace(encoder_time=0.1, genl=[2, 4]), GenerationTrace(encoder_time=0.1, genl=[6])]
    assert mean_genl(traces) == pytest.approx(4.0)
    with pytest.raises(GenerationError):
        mean_genl([])


def test_strip_generated():
    assert strip_generated([5, 6, EOS_ID, PAD_ID], EOS_ID, PAD_ID) == [5, 6]
    assert strip_generated([5, 6, 7], EOS_ID, PAD_ID) == [5, 6, 7]
    assert strip_generated([5, PAD_ID, 6, EOS_ID], EOS_ID, PAD_ID) == [5]
    assert strip_generated([PAD_ID, 5], EOS_ID, PAD_ID) == []


def test_long_inputs_are_truncated_with_warning(small_weights, caplog):
    source = [5, 6, 7, 8, 9, 10]
    cfg = GenerationConfig(max_input_len=4, max_new_tokens=4)
    with caplog.at_level(logging.WARNING, logger="generation_engine.engine"):
        long = generate(small_weights, [source], cfg)
    assert any('"truncated_inputs"' in r.getMessage() and '"count":1' in r.getMessage() for r in caplog.records)
    assert long.sequences == generate(small_weights, [source[:4]], cfg).sequences


def test_fitting_inputs_do_not_warn(small_weights, caplog):
    with caplog.at_level(logging.WARNING, logger="generation_engine.engine"):
        generate(small_weights, [[5, 6, 7]], GenerationConfig(max_input_len=4, max_new_tokens=2))
    assert not [r for r in caplog.records if "truncated_inputs" in r.getMessage()]
