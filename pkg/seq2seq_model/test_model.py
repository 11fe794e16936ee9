import numpy as np
import pytest

from seq2seq_model.checkpoint import dumps, load_checkpoint, loads, save_checkpoint
from seq2seq_model.init import init_model
from seq2seq_model.model import DecoderCache, decode_full, decode_step, encode, forward, pad_batch
from seq2seq_model.position import relative_position_bucket
from seq2seq_model.schemas import BOS_ID, ModelConfig
from utils.errors import CacheMismatchError, CheckpointError, ShapeError
from utils.rng import make_rng


def random_batch(rng, batch, length, vocab):
    return rng.integers(4, vocab, size=(batch, length))


def test_encode_shape_and_identical_rows(small_weights):
    rng = make_rng(0)
    ids = random_batch(rng, 1, 7, small_weights.config.vocab_size)
    out = encode(small_weights, np.repeat(ids, 2, axis=0))
    assert out.shape == (2, 7, small_weights.config.d_model)
    assert np.array_equal(out.data[0], out.data[1])


def test_encode_permutation_equivariant(small_weights):
    rng = make_rng(1)
    ids = random_batch(rng, 4, 6, small_weights.config.vocab_size)
    perm = np.array([2, 0, 3, 1])
    out = encode(small_weights, ids).data
    permuted = encode(small_weights, ids[perm]).data
    assert np.allclose(out[perm], permuted, atol=1e-12, rtol=0)


def test_encode_ignores_padding(small_weights):
    rng = make_rng(2)
    seq = list(random_batch(rng, 1, 5, small_weights.config.vocab_size)[0])
    ids, mask = pad_batch([seq, seq + [9, 9, 9]], pad_id=0)
    short, _ = pad_batch([seq], pad_id=0)
    padded = encode(small_weights, ids, mask).data[0, :5]
    alone = encode(small_weights, short).data[0]
    assert np.allclose(padded, alone, atol=1e-12, rtol=0)


def test_encode_rejects_bad_tokens_and_lengths(small_weights, small_config):
    with pytest.raises(ShapeError):
        encode(small_weights, np.array([[small_config.vocab_size]]))
    short = init_model(ModelConfig(**{**small_config.model_dump(), "max_input_len": 4}), seed=0)
    with pytest.raises(ShapeError):
        encode(short, np.full((1, 5), 5))


def test_cached_steps_match_full_decoder(small_weights):
    rng = make_rng(3)
    vocab = small_weights.config.vocab_size
    src = random_batch(rng, 3, 9, vocab)
    src_mask = np.ones_like(src, dtype=bool)
    src_mask[1, 6:] = False
    hidden = encode(small_weights, src, src_mask)
    prefix = np.concatenate([np.full((3, 1), BOS_ID), random_batch(rng, 3, 7, vocab)], axis=1)

    full = decode_full(small_weights, hidden, prefix, src_mask).data
    cache = None
    for t in range(prefix.shape[1]):
        logits, cache = decode_step(small_weights, hidden, cache, prefix[:, t], src_mask)
        assert logits.shape == (3, vocab)
        assert np.max(np.abs(logits.data - full[:, t])) < 1e-9
    assert cache.length == prefix.shape[1]


def test_first_step_with_empty_cache_equals_uncached(small_weights):
    rng = make_rng(4)
    src = random_batch(rng, 2, 5, small_weights.config.vocab_size)
    hidden = encode(small_weights, src)
    start = np.full(2, BOS_ID)
    no_cache, _ = decode_step(small_weights, hidden, None, start)
    empty, _ = decode_step(small_weights, hidden, DecoderCache.empty(small_weights.config, 2), start)
    assert np.array_equal(no_cache.data, empty.data)
    assert np.array_equal(no_cache.data, decode_full(small_weights, hidden, start[:, None]).data[:, 0])


def test_cache_mismatch_detected(small_weights):
    hidden = encode(small_weights, np.full((2, 4), 5))
    _, cache = decode_step(small_weights, hidden, None, np.full(2, BOS_ID))
    with pytest.raises(CacheMismatchError):
        decode_step(small_weights, encode(small_weights, np.full((3, 4), 5)), cache, np.full(3, BOS_ID))
    with pytest.raises(CacheMismatchError):
        decode_step(small_weights, encode(small_weights, np.full((2, 6), 5)), cache, np.full(2, BOS_ID))
    cache.length += 1
    with pytest.raises(CacheMismatchError):
        decode_step(small_weights, hidden, cache, np.full(2, BOS_ID))


def test_forward_shape(small_weights):
    logits = forward(small_weights, np.full((2, 5), 6), None, np.full((2, 3), BOS_ID))
    assert logits.shape == (2, 3, small_weights.config.vocab_size)


def test_bucket_zero_distance_and_monotone_scan():
    assert relative_position_bucket(0, bidirectional=True, buckets=32, max_distance=128) == 0
    ids = [relative_position_bucket(d, True, 32, 128) for d in range(0, 2 * 128 + 1)]
    assert all(a <= b for a, b in zip(ids, ids[1:]))
    past = [relative_position_bucket(-d, False, 32, 128) for d in range(0, 2 * 128 + 1)]
    assert all(a <= b for a, b in zip(past, past[1:]))


def test_bucket_clamps_beyond_max_distance():
    for d in range(128, 400):
        assert relative_position_bucket(d, True, 32, 128) == 31
        assert relative_position_bucket(-d, False, 32, 128) == 31
    assert relative_position_bucket(5, False, 32, 128) == 0


def test_bucket_vectorized_matches_scalar():
    distances = np.arange(-300, 300).reshape(20, 30)
    grid = relative_position_bucket(distances, True, 16, 64)
    assert grid.shape == distances.shape
    for d in (-300, -17, -1, 0, 3, 40, 299):
        assert grid.reshape(-1)[d + 300] == relative_position_bucket(d, True, 16, 64)


@pytest.mark.parametrize("compress", [False, True])
def test_checkpoint_round_trip_is_bit_exact(tmp_path, small_config, compress):
    weights = init_model(ModelConfig(**{**small_config.model_dump(), "tie_embeddings": False, "ff_activation": "gated-gelu"}), seed=5)
    path = save_checkpoint(weights, tmp_path / "model.ckpt", compress=compress)
    loaded = load_checkpoint(path)
    assert loaded.config == weights.config
    assert loaded.names() == weights.names()
    assert loaded.digest() == weights.digest()


def test_corrupt_checkpoint_rejected(small_weights):
    payload = dumps(small_weights)
    with pytest.raises(CheckpointError):
        loads(b"NOTACKPT" + payload[8:])
    with pytest.raises(CheckpointError):
        loads(payload[:-10])
