"""Scale sweep nodes - train one baseline per scale and relate quality and latency to size.

Scales train concurrently; their latency is measured afterwards, one model at a time, on a
shared workload. Gains and latency impacts are relative to the smallest scale.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List

import orjson
from langgraph.types import Send

from bench_harness.timing import measure_all
from eval_metrics.comparison import gain_pct, latency_impact
from seq2seq_model.init import init_model
from seq2seq_model.layout import count_by_part
from stf_pipeline.evaluation import evaluate_model
from stf_pipeline.nodes.benchmark_variants import bench_workload
from stf_pipeline.nodes.prepare_baseline import check_vocab
from stf_pipeline.schemas import ScalePoint, ScaleSweep, SweepState, TrainedScale
from stf_pipeline.training import train
from utils.errors import ConfigError
from utils.logging import log_kv
from utils.rng import derive_seed

logger = logging.getLogger(__name__)

SWEEP_FILE = "sweep.json"


def config_params(config) -> int:
    return sum(count_by_part(config).values())


def check_scales_node(state: SweepState) -> Dict[str, Any]:
    if len(state.scales) < 2:
        raise ConfigError(f"a scale sweep needs at least 2 scales, got {len(state.scales)}", field="scales")
    sizes = [config_params(s.config) for s in state.scales]
    if sizes != sorted(sizes):
        raise ConfigError(f"scales must be ordered by parameter count, got {sizes}", field="scales")
    for scale in state.scales:
        check_vocab(scale.config, state.corpus)
    return {}


def dispatch_scales(state: SweepState) -> List[Send]:
    logger.info(f"Dispatching {len(state.scales)} scales: {[s.tag for s in state.scales]}")
    return [
        Send(
            "train_scale",
            {"index": index, "scale": scale, "corpus": state.corpus, "hyper": state.hyper, "evaluation": state.evaluation},
        )
        for index, scale in enumerate(state.scales)
    ]


def train_scale_node(inputs: Dict) -> Dict[str, List[TrainedScale]]:
    scale = inputs["scale"]
    corpus = inputs["corpus"]
    hyper = inputs["hyper"]
    weights = init_model(scale.config, seed=derive_seed(hyper.seed, "init", scale.tag))
    result = train(weights, corpus, hyper, label=scale.tag)
    scores = evaluate_model(result.weights, corpus.test, corpus.vocab, inputs["evaluation"])
    trained = TrainedScale(index=inputs["index"], tag=scale.tag, weights=result.weights, scores=scores, curve=result.curve)
    return {"trained": [trained]}


def benchmark_scales_node(state: SweepState) -> Dict[str, Any]:
    bench = state.bench
    if not bench.enabled:
        return {"latency": {}}
    workload = bench_workload(state.corpus, bench, state.hyper.seed, "sweep")
    latency = {
        trained.tag: measure_all(
            trained.weights, workload, bench.batch_sizes, runs=bench.runs, warmup=bench.warmup, label=trained.tag,
        )
        for trained in sorted(state.trained, key=lambda t: t.index)
    }
    return {"latency": latency}


def summarize_sweep_node(state: SweepState) -> Dict[str, ScaleSweep]:
    trained = sorted(state.trained, key=lambda t: t.index)
    smallest = trained[0]
    smallest_latency = state.latency.get(smallest.tag, {})
    reference = smallest.scores.r2.f1
    if reference <= 0:
        log_kv(logger, logging.WARNING, "undefined_gain", scale=smallest.tag, r2=reference)

    points = []
    for item in trained:
        latency = {bs: report.mean_ms for bs, report in state.latency.get(item.tag, {}).items()}
        points.append(ScalePoint(
            scale=item.tag,
            params=item.weights.total_params(),
            r2_f1=item.scores.r2.f1,
            gain_pct=gain_pct(item.scores.r2.f1, reference) if reference > 0 else None,
            genl=item.scores.genl,
            latency_ms=latency,
            latency_impact={
                bs: latency_impact(ms, smallest_latency[bs].mean_ms) for bs, ms in latency.items() if bs in smallest_latency
            },
        ))
        gain = points[-1].gain_pct
        gain_text = f"{gain:.2f}%" if gain is not None else "undefined"
        logger.info(f"Scale {item.tag}: {points[-1].params} params, R-2 {points[-1].r2_f1:.4f}, gain {gain_text}")

    sweep = ScaleSweep(run_name=state.run_name, points=points)
    if state.output_dir:
        path = Path(state.output_dir) / SWEEP_FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(orjson.dumps(sweep.model_dump(mode="json"), option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2))
        os.replace(tmp, path)
        logger.info(f"Wrote scale sweep to {path}")
    return {"sweep": sweep}
