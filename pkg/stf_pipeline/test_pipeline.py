import numpy as np
import pytest

from bench_harness.Config import MEASURE_CONFIG, WORKLOAD_CONFIG
from bench_harness.store import ResultsStore
from corpus.schemas import SynthTask
from corpus.synth import synth_generate
from seq2seq_model.checkpoint import load_checkpoint
from seq2seq_model.init import init_model
from seq2seq_model.schemas import ModelConfig
from stf_pipeline.agent import run_grid, run_scale_sweep, shrink_then_finetune
from stf_pipeline.experiment_config import grid_specs, parse_experiment_config
from stf_pipeline.schemas import BenchSettings, ExperimentRecord, FinetuneSettings, Hyperparams, ScaleConfig
from stf_pipeline.training import token_accuracy, train, validation_loss
from structural_pruning.schemas import PruneSpec, RetentionStrategy
from utils.errors import ConfigError, EmptyCorpusError, TrainingDivergedError

NO_BENCH = BenchSettings(enabled=False)


def toy_config(layers: int = 2) -> ModelConfig:
    return ModelConfig(
        d_model=8, n_heads=2, d_kv=4, d_ff=16, n_enc_layers=layers, n_dec_layers=layers,
        vocab_size=6, rel_pos_buckets=8, rel_pos_max_distance=16,
    )


def fast_hyper(**overrides) -> Hyperparams:
    values = {"effective_batch": 8, "micro_batch": 4, "learning_rate": 1e-2, "weight_decay": 0.0, "epochs": 25, "patience": 20}
    return Hyperparams(**{**values, **overrides})


@pytest.fixture(scope="module")
def sorted_corpus():
    # Two symbols and a summary length of two: every summary is [4, 5].
    return synth_generate(SynthTask.SORTED_UNIQUE, seed=0, n_pairs=40, vocab_size=6, src_len_range=(8, 11))


@pytest.fixture(scope="module")
def grid_run(tmp_path_factory, sorted_corpus):
    out = tmp_path_factory.mktemp("grid")
    records = run_grid(
        [ScaleConfig(tag="toy", config=toy_config())], sorted_corpus, fast_hyper(),
        output_dir=str(out), run_name="toy-grid", bench=NO_BENCH,
    )
    return out, records


@pytest.mark.parametrize("values,field", [
    ({"effective_batch": 0}, "effective_batch"),
    ({"effective_batch": 12, "micro_batch": 8}, "micro_batch"),
    ({"learning_rate": 0.0}, "learning_rate"),
    ({"weight_decay": -0.1}, "weight_decay"),
    ({"max_steps": -1}, "max_steps"),
    ({"patience": 0}, "patience"),
])
def test_hyperparams_rejects_bad_values(values, field):
    with pytest.raises(ConfigError) as exc:
        Hyperparams(**values)
    assert exc.value.field == field


def test_hyperparams_accumulation():
    hyper = Hyperparams(effective_batch=64, micro_batch=8)
    assert hyper.accumulation_steps == 8
    assert hyper.optimizer().learning_rate == hyper.learning_rate


def test_bench_defaults_follow_measurement_protocol():
    bench = BenchSettings()
    assert bench.runs == MEASURE_CONFIG["runs"] == 7
    assert bench.batch_sizes == MEASURE_CONFIG["batch_sizes"] == [1, 8, 16]
    assert (bench.size, bench.input_len, bench.new_tokens) == (
        WORKLOAD_CONFIG["size"], WORKLOAD_CONFIG["input_len"], WORKLOAD_CONFIG["new_tokens"],
    )


def test_quick_bench_only_fills_unset_fields():
    quick = BenchSettings(quick=True)
    assert (quick.batch_sizes, quick.runs, quick.size) == ([1], 3, 4)
    assert BenchSettings(quick=True, runs=5).runs == 5
    assert parse_experiment_config({"name": "q", "corpus": {"path": "x.tsv"}, "bench": {"quick": True}}).bench.runs == 3


def test_finetune_settings_resolve():
    base = fast_hyper()
    other = fast_hyper(learning_rate=1e-3)
    assert FinetuneSettings().resolve(base) is base
    assert FinetuneSettings(same_hyperparams=False, hyperparams=other).resolve(base) is other


def test_zero_steps_leaves_weights_untouched(sorted_corpus):
    weights = init_model(toy_config(), seed=3)
    result = train(weights, sorted_corpus, fast_hyper(max_steps=0))
    assert result.steps == 0
    assert result.curve == []
    assert result.weights.digest() == weights.digest()


def test_training_is_deterministic(sorted_corpus):
    weights = init_model(toy_config(), seed=3)
    hyper = fast_hyper(max_steps=6)
    first = train(weights, sorted_corpus, hyper)
    second = train(weights, sorted_corpus, hyper)
    assert first.curve == second.curve
    assert first.weights.digest() == second.weights.digest()


def test_training_does_not_modify_input(sorted_corpus):
    weights = init_model(toy_config(), seed=3)
    before = weights.digest()
    train(weights, sorted_corpus, fast_hyper(max_steps=4))
    assert weights.digest() == before


def test_training_reduces_loss(sorted_corpus):
    weights = init_model(toy_config(), seed=3)
    before = validation_loss(weights, sorted_corpus.valid)
    result = train(weights, sorted_corpus, fast_hyper(epochs=10, patience=10))
    assert result.curve[-1] < result.curve[0]
    assert result.best_valid_loss < before
    assert result.steps == 40
    assert 0.0 <= token_accuracy(result.weights, sorted_corpus.test) <= 1.0


def test_max_steps_caps_training(sorted_corpus):
    result = train(init_model(toy_config(), seed=3), sorted_corpus, fast_hyper(max_steps=5))
    assert result.steps == 5
    assert len(result.curve) == 5


def test_divergence_is_reported_with_step(sorted_corpus):
    weights = init_model(toy_config(), seed=3)
    weights.tensors["decoder.final_norm"].data[...] = np.inf
    with pytest.raises(TrainingDivergedError) as exc:
        train(weights, sorted_corpus, fast_hyper())
    assert exc.value.step == 0


def test_empty_training_split_rejected(sorted_corpus):
    empty = sorted_corpus.model_copy(update={"train_idx": []})
    with pytest.raises(EmptyCorpusError):
        train(init_model(toy_config(), seed=3), empty, fast_hyper())


def test_grid_specs_cover_every_pruned_shape():
    specs = grid_specs(toy_config(6), RetentionStrategy.FIRST_K)
    assert len(specs) == 15
    assert (6, 6) not in [s.shape for s in specs]
    assert all(s.strategy == RetentionStrategy.FIRST_K for s in specs)


def test_grid_specs_need_equal_stacks():
    config = toy_config().model_copy(update={"n_dec_layers": 3})
    with pytest.raises(ConfigError):
        grid_specs(config)


def test_experiment_config_rejects_unknown_keys():
    base = {"name": "x", "corpus": {"synth": {"task": "LeadK"}}}
    parse_experiment_config(base)
    with pytest.raises(ConfigError) as exc:
        parse_experiment_config({**base, "epochs": 3})
    assert exc.value.field == "epochs"
    with pytest.raises(ConfigError) as exc:
        parse_experiment_config({**base, "hyperparams": {"lr": 0.1}})
    assert exc.value.field == "hyperparams.lr"
    with pytest.raises(ConfigError) as exc:
        parse_experiment_config({**base, "corpus": {"synth": {"task": "LeadK", "size": 3}}})
    assert exc.value.field == "corpus.synth.size"


def test_experiment_config_builds_scales_and_seed():
    config = parse_experiment_config({
        "name": "x",
        "seed": 9,
        "scales": [{"tag": "a", "dims": toy_config().model_dump(exclude={"vocab_size"})}],
        "corpus": {"synth": {"task": "SortedUnique", "vocab_size": 6, "src_len_range": [8, 11], "n_pairs": 20}},
        "hyperparams": {"effective_batch": 8, "micro_batch": 4},
    })
    assert config.hyper().seed == 9
    corpus = config.load_corpus()
    (scale,) = config.scale_configs(len(corpus.vocab))
    assert scale.config.vocab_size == 6
    assert len(config.specs_for(scale.config)) == 3


def test_grid_records(grid_run):
    _, records = grid_run
    assert [r.spec.shape for r in records] == [(2, 2), (2, 1), (1, 2), (1, 1)]
    assert [r.series for r in records] == ["baseline", "decoder", "encoder", "both"]
    baseline = records[0]
    assert baseline.comparison.recall_pct == 100.0
    assert baseline.comparison.impact_pct == 0.0
    assert baseline.comparison.speedup == 1.0
    assert baseline.scores.r2.f1 > 0
    assert all(r.finetuned for r in records[1:])
    assert records[3].retained_enc == [0] and records[3].retained_dec == [0]
    assert records[3].params < records[1].params < baseline.params


def test_grid_writes_records_and_checkpoints(grid_run):
    out, records = grid_run
    store = ResultsStore(out)
    assert sorted(store.names()) == sorted(r.name for r in records)
    restored = ExperimentRecord.model_validate(store.read("toy-e2-d1"))
    assert restored == records[1]
    assert (out / "checkpoints" / "toy-baseline.ckpt").exists()
    assert (out / "checkpoints" / "toy-e1-d1.ckpt").exists()
    assert (out / "report.csv").exists()
    assert (out / "tables.md").exists()


def test_full_spec_without_finetuning_keeps_quality(grid_run, sorted_corpus):
    out, records = grid_run
    baseline = load_checkpoint(out / "checkpoints" / "toy-baseline.ckpt")
    record = shrink_then_finetune(
        baseline, PruneSpec(enc_keep=2, dec_keep=2), sorted_corpus, fast_hyper(),
        scale_tag="toy", finetune=FinetuneSettings(enabled=False), bench=NO_BENCH,
    )
    assert record.comparison.recall_pct == pytest.approx(100.0)
    assert record.scores == records[0].scores
    assert not record.finetuned
    assert record.curve == []


def test_run_grid_rejects_duplicate_tags(sorted_corpus):
    scale = ScaleConfig(tag="toy", config=toy_config())
    with pytest.raises(ConfigError):
        run_grid([scale, scale], sorted_corpus, fast_hyper())


def test_grid_rejects_small_model_vocabulary(sorted_corpus):
    scale = ScaleConfig(tag="toy", config=toy_config().model_copy(update={"vocab_size": 5}))
    with pytest.raises(ConfigError):
        run_grid([scale], sorted_corpus, fast_hyper(), bench=NO_BENCH)


def test_scale_sweep_needs_two_scales(sorted_corpus):
    with pytest.raises(ConfigError):
        run_scale_sweep([ScaleConfig(tag="toy", config=toy_config())], sorted_corpus, fast_hyper())


@pytest.fixture(scope="module")
def one_token_corpus():
    # Single-token summaries have no bigrams, so every R-2 F1 is zero.
    return synth_generate(SynthTask.LEAD_K, seed=0, n_pairs=40, vocab_size=6, src_len_range=(4, 4), compression_target=4.0)


def test_zero_baseline_score_keeps_grid_records(tmp_path, one_token_corpus):
    assert {len(p.summary) for p in one_token_corpus.train} == {1}
    bench = BenchSettings(batch_sizes=[1], runs=1, warmup=0, size=2, input_len=8, new_tokens=4)
    records = run_grid(
        [ScaleConfig(tag="one", config=toy_config())], one_token_corpus, fast_hyper(epochs=2),
        output_dir=str(tmp_path), finetune=FinetuneSettings(enabled=False), bench=bench,
    )
    baseline, *variants = records
    assert baseline.scores.r2.f1 == 0.0
    assert (baseline.comparison.recall_pct, baseline.comparison.impact_pct, baseline.comparison.speedup) == (100.0, 0.0, 1.0)
    assert len(variants) == 3
    for record in variants:
        assert record.comparison.recall_pct is None
        assert record.comparison.impact_pct is None
        assert record.comparison.speedup > 0
        assert record.speedups[1] == pytest.approx(record.comparison.speedup)
    assert len(ResultsStore(tmp_path).names()) == 4
    assert (tmp_path / "report.csv").exists()


def test_zero_smallest_score_leaves_gain_undefined(one_token_corpus):
    scales = [ScaleConfig(tag=f"l{n}", config=toy_config(n)) for n in (1, 2)]
    sweep = run_scale_sweep(scales, one_token_corpus, fast_hyper(epochs=2), bench=NO_BENCH)
    assert [p.scale for p in sweep.points] == ["l1", "l2"]
    assert [p.gain_pct for p in sweep.points] == [None, None]
    assert all(p.r2_f1 == 0.0 for p in sweep.points)
