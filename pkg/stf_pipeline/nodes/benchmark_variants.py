"""Benchmark variants node - measures baseline and variant latency one model at a time.

Runs after every variant has finished training so measurements never share the CPU.
"""

import logging
from typing import Any, Dict

from bench_harness.schemas import Workload
from bench_harness.timing import measure_all
from bench_harness.workload import build_workload, sample_sources, straggler_lengths
from corpus.schemas import Corpus
from stf_pipeline.schemas import BenchSettings, GridState
from utils.rng import derive_seed

logger = logging.getLogger(__name__)

BASELINE_KEY = "baseline"


def bench_workload(corpus: Corpus, bench: BenchSettings, seed: int, name: str) -> Workload:
    """Fixed workload from test-split sources, shared by every model it compares."""
    sources = sample_sources([p.source for p in corpus.test], bench.size, derive_seed(seed, "bench", name))
    forced = straggler_lengths(bench.new_tokens, max(bench.batch_sizes)) if bench.stragglers else None
    return build_workload(
        sources, size=bench.size, input_len=bench.input_len, new_tokens=bench.new_tokens,
        forced_lengths=forced, name=name,
    )


def benchmark_variants_node(state: GridState) -> Dict[str, Any]:
    bench = state.bench
    if not bench.enabled:
        return {"latency": {}}

    workload = bench_workload(state.corpus, bench, state.hyper.seed, state.scale.tag)
    options = {"runs": bench.runs, "warmup": bench.warmup}
    latency = {
        BASELINE_KEY: measure_all(
            state.baseline, workload, bench.batch_sizes, label=f"{state.scale.tag}-baseline", **options
        )
    }
    for variant in sorted(state.variants, key=lambda v: v.index):
        label = variant.spec.label()
        latency[label] = measure_all(variant.weights, workload, bench.batch_sizes, label=f"{state.scale.tag}-{label}", **options)
    logger.info(f"Benchmarked {len(latency)} models of {state.scale.tag} at batch sizes {bench.batch_sizes}")
    return {"latency": latency}
