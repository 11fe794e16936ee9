"""Assemble records node - turns scores and latencies into experiment records.

The baseline record is pinned at R = 100%, zero impact and unit speedup; every variant is
compared against it on R-2 F1 and batch-size-1 latency. Records and variant checkpoints
are written to the run directory when one is set.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

from bench_harness.schemas import LatencyReport
from bench_harness.store import ResultsStore
from bench_harness.timing import speedup_table
from eval_metrics.comparison import compare, latency_speedup
from eval_metrics.schemas import Comparison
from seq2seq_model.checkpoint import save_checkpoint
from stf_pipeline.nodes.benchmark_variants import BASELINE_KEY
from stf_pipeline.schemas import ExperimentRecord, GridState
from structural_pruning.pruning import retained_layers
from structural_pruning.schemas import PruneSpec
from utils.logging import log_kv

logger = logging.getLogger(__name__)


def _bs1(reports: Dict[int, LatencyReport]) -> Optional[float]:
    report = reports.get(1)
    return report.mean_ms if report is not None else None


def compare_to_baseline(
    scale: str, spec: PruneSpec, score: float, baseline_score: float, baseline_ms: Optional[float], candidate_ms: Optional[float],
) -> Comparison:
    """R and impact against the baseline R-2 F1; both stay undefined when the baseline scores zero."""
    if baseline_score > 0:
        return compare(score, baseline_score, baseline_latency=baseline_ms, candidate_latency=candidate_ms)
    log_kv(logger, logging.WARNING, "undefined_recall", scale=scale, variant=spec.label(), baseline_r2=baseline_score)
    return Comparison(speedup=latency_speedup(baseline_ms, candidate_ms))


def assemble_records_node(state: GridState) -> Dict[str, List[ExperimentRecord]]:
    config = state.scale.config
    base_shape = (config.n_enc_layers, config.n_dec_layers)
    base_latency = state.latency.get(BASELINE_KEY, {})
    common = {"run_name": state.run_name, "scale": state.scale.tag, "base_layers": base_shape, "seed": state.hyper.seed}

    records: List[ExperimentRecord] = []
    if state.include_baseline:
        full = PruneSpec(enc_keep=base_shape[0], dec_keep=base_shape[1])
        enc, dec = retained_layers(full, config)
        records.append(ExperimentRecord(
            **common,
            spec=full,
            retained_enc=enc,
            retained_dec=dec,
            params=state.baseline.total_params(),
            finetuned=False,
            scores=state.baseline_scores,
            comparison=Comparison(recall_pct=100.0, impact_pct=0.0, speedup=1.0),
            latency=base_latency,
            speedups={bs: 1.0 for bs in base_latency},
            curve=state.baseline_curve,
        ))

    for variant in sorted(state.variants, key=lambda v: v.index):
        latency = state.latency.get(variant.spec.label(), {})
        enc, dec = retained_layers(variant.spec, config)
        records.append(ExperimentRecord(
            **common,
            spec=variant.spec,
            retained_enc=enc,
            retained_dec=dec,
            params=variant.weights.total_params(),
            finetuned=variant.finetuned,
            scores=variant.scores,
            comparison=compare_to_baseline(
                state.scale.tag,
                variant.spec,
                variant.scores.r2.f1,
                state.baseline_scores.r2.f1,
                _bs1(base_latency),
                _bs1(latency),
            ),
            latency=latency,
            speedups=speedup_table(base_latency, latency),
            curve=variant.curve,
        ))

    if state.output_dir:
        store = ResultsStore(state.output_dir)
        checkpoints = Path(state.output_dir) / "checkpoints"
        variant_weights = [v.weights for v in sorted(state.variants, key=lambda v: v.index)]
        offset = len(records) - len(variant_weights)
        for position, record in enumerate(records):
            store.write(record.name, record)
            if position >= offset:
                save_checkpoint(variant_weights[position - offset], checkpoints / f"{record.name}.ckpt")
            recall = record.comparison.recall_pct
            log_kv(logger, logging.INFO, "record", name=record.name, recall_pct=round(recall, 2) if recall is not None else None)

    logger.info(f"Assembled {len(records)} records for {state.scale.tag}")
    return {"records": records}
