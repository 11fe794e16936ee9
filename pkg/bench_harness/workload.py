import logging
from typing import List, Optional, Sequence

import numpy as np

from bench_harness.Config import WORKLOAD_CONFIG
from bench_harness.schemas import Workload
from generation_engine.schemas import GenerationConfig
from utils.errors import BenchmarkError
from utils.rng import make_rng

logger = logging.getLogger(__name__)


def _fit_length(source: Sequence[int], length: int) -> List[int]:
    """Truncate, or repeat the sequence until it reaches `length`."""
    reps = -(-length // len(source))
    return (list(source) * reps)[:length]


def build_workload(
    sources: Sequence[Sequence[int]],
    *,
    size: int = WORKLOAD_CONFIG["size"],
    input_len: int = WORKLOAD_CONFIG["input_len"],
    new_tokens: int = WORKLOAD_CONFIG["new_tokens"],
    forced_lengths: Optional[Sequence[int]] = None,
    name: str = "workload",
) -> Workload:
    """Workload of `size` inputs of exactly `input_len` tokens taken cyclically from `sources`.

    Without `forced_lengths` every input decodes exactly `new_tokens` steps. A shorter list
    is cycled across the inputs, which gives straggler batches.
    """
    usable = [s for s in sources if len(s) > 0]
    if not usable or size < 1:
        raise BenchmarkError("empty workload")
    inputs = [_fit_length(usable[i % len(usable)], input_len) for i in range(size)]
    schedule = list(forced_lengths) if forced_lengths else [new_tokens]
    forced = [int(schedule[i % len(schedule)]) for i in range(size)]
    if max(forced) > new_tokens:
        raise BenchmarkError(f"forced length {max(forced)} exceeds {new_tokens} new tokens")
    generation = GenerationConfig(max_input_len=max(input_len, 1), max_new_tokens=new_tokens)
    logger.debug(f"Built workload {name}: {size} x {input_len} tokens, lengths {sorted(set(forced))}")
    return Workload(name=name, inputs=inputs, forced_lengths=forced, generation=generation)


def random_workload(vocab_size: int, seed: int, **kwargs) -> Workload:
    """Workload from uniformly drawn non-special tokens."""
    rng = make_rng(seed)
    input_len = kwargs.get("input_len", WORKLOAD_CONFIG["input_len"])
    size = kwargs.get("size", WORKLOAD_CONFIG["size"])
    sources = rng.integers(4, vocab_size, size=(size, input_len)).tolist()
    return build_workload(sources, **kwargs)


def straggler_lengths(new_tokens: int, batch_size: int) -> List[int]:
    """One long sequence per batch and the rest stopping early."""
    short = max(1, new_tokens // 8)
    return [new_tokens] + [short] * (batch_size - 1)


def batches(workload: Workload, batch_size: int):
    if batch_size < 1:
        raise BenchmarkError(f"batch size must be >= 1, got {batch_size}")
    forced = workload.forced_lengths
    for start in range(0, workload.size, batch_size):
        end = start + batch_size
        yield workload.inputs[start:end], (forced[start:end] if forced is not None else None)


def sample_sources(corpus_sources: Sequence[Sequence[int]], count: int, seed: int) -> List[List[int]]:
    rng = make_rng(seed)
    order = rng.permutation(len(corpus_sources))[:count]
    return [list(corpus_sources[int(i)]) for i in np.sort(order)]
