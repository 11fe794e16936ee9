import logging
from typing import List, Optional, Sequence

from dotenv import load_dotenv
from langgraph.graph import StateGraph
from langgraph.graph.state import CompiledStateGraph

from corpus.schemas import Corpus
from seq2seq_model.schemas import ModelWeights
from stf_pipeline.experiment_config import ExperimentConfig, grid_specs
from stf_pipeline.nodes.dispatch_variants import dispatch_variants
from stf_pipeline.nodes import (
    assemble_records_node,
    benchmark_scales_node,
    benchmark_variants_node,
    check_scales_node,
    dispatch_scales,
    prepare_baseline_node,
    refit_variant_node,
    summarize_sweep_node,
    train_scale_node,
)
from stf_pipeline.schemas import (
    BenchSettings,
    EvaluationSettings,
    ExperimentRecord,
    FinetuneSettings,
    GridState,
    Hyperparams,
    ScaleConfig,
    ScaleSweep,
    SweepState,
)
from structural_pruning.schemas import PruneSpec, RetentionStrategy
from utils.errors import ConfigError
from utils.settings import settings

load_dotenv()
logger = logging.getLogger(__name__)


def create_grid_graph() -> CompiledStateGraph:
    """Set up the shrink-then-fine-tune workflow for one model scale.

    The pipeline follows these steps:
    1. Train (or take) the baseline and score it
    2. Fan the requested prune specs out for parallel re-fine-tuning
    3. Benchmark every model, one at a time
    4. Assemble and store the experiment records
    """
    workflow = StateGraph(GridState)

    workflow.add_node("prepare_baseline", prepare_baseline_node)
    workflow.add_node("refit_variant", refit_variant_node)
    workflow.add_node("benchmark_variants", benchmark_variants_node)
    workflow.add_node("assemble_records", assemble_records_node)

    workflow.set_entry_point("prepare_baseline")
    workflow.add_conditional_edges(
        "prepare_baseline", dispatch_variants, ["refit_variant", "benchmark_variants"]
    )
    workflow.add_edge("refit_variant", "benchmark_variants")
    workflow.add_edge("benchmark_variants", "assemble_records")
    workflow.set_finish_point("assemble_records")

    return workflow.compile()


def create_sweep_graph() -> CompiledStateGraph:
    """Set up the scale sweep: validate, train every scale in parallel, benchmark, summarize."""
    workflow = StateGraph(SweepState)

    workflow.add_node("check_scales", check_scales_node)
    workflow.add_node("train_scale", train_scale_node)
    workflow.add_node("benchmark_scales", benchmark_scales_node)
    workflow.add_node("summarize_sweep", summarize_sweep_node)

    workflow.set_entry_point("check_scales")
    workflow.add_conditional_edges("check_scales", dispatch_scales, ["train_scale"])
    workflow.add_edge("train_scale", "benchmark_scales")
    workflow.add_edge("benchmark_scales", "summarize_sweep")
    workflow.set_finish_point("summarize_sweep")

    return workflow.compile()


graph = create_grid_graph()
sweep_graph = create_sweep_graph()


def _invoke(compiled: CompiledStateGraph, payload: dict) -> dict:
    return compiled.invoke(payload, config={"max_concurrency": settings.threads})


def run_scale(
    scale: ScaleConfig,
    corpus: Corpus,
    hyper: Hyperparams,
    specs: Sequence[PruneSpec],
    *,
    run_name: str = "grid",
    finetune: Optional[FinetuneSettings] = None,
    evaluation: Optional[EvaluationSettings] = None,
    bench: Optional[BenchSettings] = None,
    output_dir: Optional[str] = None,
    baseline: Optional[ModelWeights] = None,
    include_baseline: bool = True,
) -> List[ExperimentRecord]:
    payload = {
        "run_name": run_name,
        "scale": scale,
        "corpus": corpus,
        "hyper": hyper,
        "finetune": finetune or FinetuneSettings(),
        "evaluation": evaluation or EvaluationSettings(),
        "bench": bench or BenchSettings(),
        "specs": list(specs),
        "output_dir": str(output_dir) if output_dir else None,
        "baseline": baseline,
        "include_baseline": include_baseline,
    }
    return _invoke(graph, payload)["records"]


def shrink_then_finetune(
    baseline_weights: ModelWeights,
    spec: PruneSpec,
    corpus: Corpus,
    hyper: Hyperparams,
    *,
    scale_tag: str = "model",
    **options,
) -> ExperimentRecord:
    """Prune a trained baseline to `spec`, re-fine-tune, evaluate and benchmark it against the baseline."""
    scale = ScaleConfig(tag=scale_tag, config=baseline_weights.config)
    records = run_scale(scale, corpus, hyper, [spec], baseline=baseline_weights, include_baseline=False, **options)
    return records[0]


def run_grid(
    scales: Sequence[ScaleConfig],
    corpus: Corpus,
    hyper: Hyperparams,
    *,
    grid: bool = True,
    strategy: RetentionStrategy = RetentionStrategy.EVENLY_SPACED,
    output_dir: Optional[str] = None,
    **options,
) -> List[ExperimentRecord]:
    """Baseline plus every pruned variant for each scale; writes the report when `output_dir` is set."""
    tags = [s.tag for s in scales]
    if not tags or len(set(tags)) != len(tags):
        raise ConfigError(f"need distinct scale tags, got {tags}", field="scales")

    records: List[ExperimentRecord] = []
    for scale in scales:
        specs = grid_specs(scale.config, strategy) if grid else []
        logger.info(f"Grid for {scale.tag}: baseline and {len(specs)} variants")
        records.extend(run_scale(scale, corpus, hyper, specs, output_dir=output_dir, **options))

    if output_dir:
        from cli_reporting.reports import write_report

        write_report(output_dir)
    return records


def run_scale_sweep(
    scales: Sequence[ScaleConfig],
    corpus: Corpus,
    hyper: Hyperparams,
    *,
    run_name: str = "sweep",
    evaluation: Optional[EvaluationSettings] = None,
    bench: Optional[BenchSettings] = None,
    output_dir: Optional[str] = None,
) -> ScaleSweep:
    """Gain-vs-params and latency-vs-scale points, relative to the first (smallest) scale."""
    if len(scales) < 2:
        raise ConfigError(f"a scale sweep needs at least 2 scales, got {len(scales)}", field="scales")
    payload = {
        "run_name": run_name,
        "scales": list(scales),
        "corpus": corpus,
        "hyper": hyper,
        "evaluation": evaluation or EvaluationSettings(),
        "bench": bench or BenchSettings(),
        "output_dir": str(output_dir) if output_dir else None,
    }
    return _invoke(sweep_graph, payload)["sweep"]


def run_experiment(config: ExperimentConfig) -> List[ExperimentRecord]:
    corpus = config.load_corpus()
    return run_grid(
        config.scale_configs(len(corpus.vocab)),
        corpus,
        config.hyper(),
        grid=config.grid,
        strategy=config.strategy,
        output_dir=str(config.run_dir()),
        run_name=config.name,
        finetune=config.finetune,
        evaluation=config.evaluation,
        bench=config.bench,
    )


def run_experiment_sweep(config: ExperimentConfig) -> ScaleSweep:
    corpus = config.load_corpus()
    return run_scale_sweep(
        config.scale_configs(len(corpus.vocab)),
        corpus,
        config.hyper(),
        run_name=config.name,
        evaluation=config.evaluation,
        bench=config.bench,
        output_dir=str(config.run_dir()),
    )
