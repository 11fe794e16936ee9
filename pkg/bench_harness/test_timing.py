import pytest

from bench_harness.schemas import LatencyReport
from bench_harness.store import ResultsStore
from bench_harness.timing import measure, speedup, speedup_table
from bench_harness.workload import batches, build_workload, random_workload, straggler_lengths
from utils.errors import BenchmarkError, RecordError


def report(mean_ms, batch_size=1, digest="abc"):
    return LatencyReport(
        batch_size=batch_size, runs_ms=[mean_ms], mean_ms=mean_ms, std_ms=0.0,
        encoder_share=0.5, decoder_share=0.5, steps=1, n_batches=1, workload_digest=digest,
    )


def test_speedup_arithmetic():
    assert speedup(report(1430), report(373)) == pytest.approx(3.83, abs=0.01)
    assert speedup(report(445), report(89.7)) == pytest.approx(4.96, abs=0.01)
    same = report(12.5)
    assert speedup(same, same) == 1.0


def test_speedup_refuses_mismatched_reports():
    with pytest.raises(BenchmarkError):
        speedup(report(10, digest="a"), report(5, digest="b"))
    with pytest.raises(BenchmarkError):
        speedup(report(10, batch_size=1), report(5, batch_size=8))


def test_speedup_table_per_batch_size():
    table = speedup_table({1: report(10), 8: report(40, 8)}, {1: report(5), 8: report(20, 8)})
    assert table == {1: 2.0, 8: 2.0}


def test_workload_is_fixed_length():
    workload = build_workload([[5, 6, 7], [8, 9]], size=5, input_len=7, new_tokens=4)
    assert workload.size == 5
    assert all(len(x) == 7 for x in workload.inputs)
    assert workload.inputs[0] == [5, 6, 7, 5, 6, 7, 5]
    assert workload.inputs[1] == [8, 9, 8, 9, 8, 9, 8]
    assert workload.forced_lengths == [4] * 5
    assert workload.digest() == build_workload([[5, 6, 7], [8, 9]], size=5, input_len=7, new_tokens=4).digest()


def test_straggler_schedule_and_batching():
    lengths = straggler_lengths(32, 4)
    assert lengths == [32, 4, 4, 4]
    workload = build_workload([[5, 6]], size=8, input_len=4, new_tokens=32, forced_lengths=lengths)
    sliced = list(batches(workload, 4))
    assert len(sliced) == 2
    assert sliced[1][1] == [32, 4, 4, 4]
    with pytest.raises(BenchmarkError):
        build_workload([[5]], size=2, input_len=4, new_tokens=8, forced_lengths=[9])
    with pytest.raises(BenchmarkError):
        build_workload([], size=2)


def test_measure_reports_runs_and_shares(small_weights):
    workload = random_workload(small_weights.config.vocab_size, seed=3, size=4, input_len=12, new_tokens=4)
    result = measure(small_weights, workload, batch_size=2, runs=3, warmup=1)
    assert len(result.runs_ms) == 3
    assert result.std_ms >= 0
    assert result.n_batches == 2
    assert result.steps == 8
    assert 0.8 <= result.encoder_share + result.decoder_share <= 1.0 + 1e-9
    assert result.workload_digest == workload.digest()
    with pytest.raises(BenchmarkError):
        measure(small_weights, workload, batch_size=2, runs=0)


def test_store_is_append_only(tmp_path):
    store = ResultsStore(tmp_path / "run")
    store.write("e6-d6", report(10.0))
    assert store.read("e6-d6")["mean_ms"] == 10.0
    with pytest.raises(RecordError):
        store.write("e6-d6", report(11.0))
    store.write("e6-d3", {"mean_ms": 4.0})
    assert store.names() == ["e6-d3", "e6-d6"]
    assert len(store.load_all()) == 2
    with pytest.raises(RecordError):
        store.read("missing")
