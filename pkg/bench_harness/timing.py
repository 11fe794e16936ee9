"""Latency measurement.

Each report comes from one discarded warm-up run followed by timed runs over the whole
workload, executed on one pinned core while holding a process-wide lock, so that two
measurements never overlap.
"""

import logging
import threading
import time
from contextlib import contextmanager
from typing import Dict, Iterable, Tuple

import numpy as np
import psutil

from bench_harness.Config import MEASURE_CONFIG
from bench_harness.schemas import LatencyReport, Workload
from bench_harness.workload import batches
from generation_engine.engine import generate
from seq2seq_model.schemas import ModelWeights
from utils.errors import BenchmarkError
from utils.logging import log_kv

logger = logging.getLogger(__name__)

_MEASURE_LOCK = threading.Lock()


@contextmanager
def single_thread():
    """Hold the measurement lock and pin the process to one CPU where the OS allows it."""
    with _MEASURE_LOCK:
        process = psutil.Process()
        previous = None
        if hasattr(process, "cpu_affinity"):
            try:
                previous = process.cpu_affinity()
                process.cpu_affinity(previous[:1])
            except (psutil.Error, OSError, ValueError) as exc:
                logger.debug(f"CPU pinning unavailable: {exc}")
                previous = None
        try:
            yield
        finally:
            if previous is not None:
                process.cpu_affinity(previous)


def _run_once(weights: ModelWeights, workload: Workload, batch_size: int) -> Tuple[float, float, float, int, int]:
    encoder = decoder = 0.0
    steps = n_batches = 0
    start = time.perf_counter()
    for inputs, forced in batches(workload, batch_size):
        trace = generate(weights, inputs, workload.generation, forced_lengths=forced).trace
        encoder += trace.encoder_time
        decoder += trace.decoder_time
        steps += trace.steps
        n_batches += 1
    wall = time.perf_counter() - start
    return wall, encoder, decoder, steps, n_batches


def measure(
    weights: ModelWeights,
    workload: Workload,
    batch_size: int,
    *,
    runs: int = MEASURE_CONFIG["runs"],
    warmup: int = MEASURE_CONFIG["warmup"],
    label: str = "",
) -> LatencyReport:
    if workload.size == 0:
        raise BenchmarkError("empty workload")
    if runs < 1:
        raise BenchmarkError(f"runs must be >= 1, got {runs}")

    with single_thread():
        for _ in range(warmup):
            _run_once(weights, workload, batch_size)
        results = [_run_once(weights, workload, batch_size) for _ in range(runs)]

    wall = np.array([r[0] for r in results])
    report = LatencyReport(
        batch_size=batch_size,
        runs_ms=(wall * 1e3).tolist(),
        mean_ms=float(wall.mean() * 1e3),
        std_ms=float(wall.std() * 1e3),
        encoder_share=float(np.mean([r[1] / r[0] for r in results])),
        decoder_share=float(np.mean([r[2] / r[0] for r in results])),
        steps=results[-1][3],
        n_batches=results[-1][4],
        workload_digest=workload.digest(),
        label=label,
    )
    log_kv(
        logger, logging.INFO, "latency",
        label=label, batch_size=batch_size, mean_ms=round(report.mean_ms, 3), std_ms=round(report.std_ms, 3),
        encoder_share=round(report.encoder_share, 4), decoder_share=round(report.decoder_share, 4),
    )
    return report


def speedup(baseline: LatencyReport, candidate: LatencyReport) -> float:
    if baseline.batch_size != candidate.batch_size:
        raise BenchmarkError(f"batch size {baseline.batch_size} vs {candidate.batch_size}")
    if baseline.workload_digest != candidate.workload_digest:
        raise BenchmarkError("reports were measured on different workloads")
    if candidate.mean_ms <= 0:
        raise BenchmarkError(f"non-positive candidate latency {candidate.mean_ms}")
    return baseline.mean_ms / candidate.mean_ms


def speedup_table(baseline: Dict[int, LatencyReport], candidate: Dict[int, LatencyReport]) -> Dict[int, float]:
    """Speedup per batch size, for every batch size measured on both sides."""
    return {bs: speedup(baseline[bs], candidate[bs]) for bs in sorted(baseline) if bs in candidate}


def measure_all(
    weights: ModelWeights,
    workload: Workload,
    batch_sizes: Iterable[int] = MEASURE_CONFIG["batch_sizes"],
    **kwargs,
) -> Dict[int, LatencyReport]:
    return {bs: measure(weights, workload, bs, **kwargs) for bs in batch_sizes}
