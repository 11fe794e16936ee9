"""Measured latency behaviour of pruned models. Slow: run with `pytest -m slow`."""

import pytest

from bench_harness.cost_model import fit_cost_model, holdout_speedup_errors
from bench_harness.schemas import Measurement
from bench_harness.timing import measure, speedup
from bench_harness.workload import random_workload, straggler_lengths
from seq2seq_model.Config import build_config
from seq2seq_model.init import init_model
from structural_pruning.pruning import prune
from structural_pruning.schemas import PruneSpec

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def latency_model():
    return init_model(build_config("toy-latency", vocab_size=1000), seed=17)


def variant(weights, enc, dec):
    return prune(weights, PruneSpec(enc_keep=enc, dec_keep=dec))


def test_decoder_pruning_dominates_speedup(latency_model):
    workload = random_workload(1000, seed=1, size=2, input_len=512, new_tokens=128)
    reports = {
        shape: measure(variant(latency_model, *shape), workload, batch_size=1, runs=3)
        for shape in [(6, 6), (6, 1), (1, 6), (1, 1)]
    }
    base = reports[(6, 6)]
    dec = speedup(base, reports[(6, 1)])
    enc = speedup(base, reports[(1, 6)])
    both = speedup(base, reports[(1, 1)])
    assert dec >= 2.0
    assert enc <= 1.3
    assert both >= dec


def test_decoder_share_grows_with_output_length(latency_model):
    short = random_workload(1000, seed=2, size=2, input_len=256, new_tokens=32)
    long = random_workload(1000, seed=2, size=2, input_len=256, new_tokens=128)
    assert measure(latency_model, long, 1, runs=3).decoder_share > measure(latency_model, short, 1, runs=3).decoder_share


def test_same_model_is_stable(latency_model):
    workload = random_workload(1000, seed=3, size=2, input_len=128, new_tokens=32)
    first = measure(latency_model, workload, 1)
    second = measure(latency_model, workload, 1)
    assert 0.9 <= speedup(first, second) <= 1.1


def test_batch_size_crossover(latency_model):
    lengths = straggler_lengths(128, 16)
    workload = random_workload(1000, seed=4, size=16, input_len=512, new_tokens=128, forced_lengths=lengths)
    reports = {
        shape: {bs: measure(variant(latency_model, *shape), workload, bs, runs=3) for bs in (1, 16)}
        for shape in [(6, 6), (1, 6), (6, 1)]
    }
    base = reports[(6, 6)]
    encoder_only = {bs: speedup(base[bs], reports[(1, 6)][bs]) for bs in (1, 16)}
    decoder_only = {bs: speedup(base[bs], reports[(6, 1)][bs]) for bs in (1, 16)}
    assert encoder_only[16] > encoder_only[1]
    assert decoder_only[16] < decoder_only[1]


def test_cost_model_fits_measured_grid(latency_model):
    workload = random_workload(1000, seed=5, size=2, input_len=128, new_tokens=32)
    shapes = [(6, 6), (6, 4), (6, 2), (4, 6), (2, 6), (4, 4), (2, 2), (3, 5)]
    points = []
    for enc, dec in shapes:
        result = measure(variant(latency_model, enc, dec), workload, 1, runs=3)
        points.append(Measurement(l_enc=enc, l_dec=dec, steps=result.steps, batch_size=1, mean_ms=result.mean_ms))
    assert fit_cost_model(points).by_batch[1].r2 >= 0.98
    assert all(e.rel_error <= 0.15 for e in holdout_speedup_errors(points))
