"""Batched greedy decoding.

The batch keeps stepping until every sequence has produced EOS or the step cap is hit.
Finished sequences stay in the batch and keep computing; their outputs are replaced by pad.
"""

import logging
import time
from typing import Iterable, List, Optional, Sequence

import numpy as np

from generation_engine.schemas import GenerationConfig, GenerationResult, GenerationTrace
from seq2seq_model.model import decode_full, decode_step, encode, pad_batch
from seq2seq_model.schemas import ModelWeights
from tensor_autodiff.tensor import no_grad
from utils.errors import GenerationError
from utils.logging import log_kv

logger = logging.getLogger(__name__)


class BatchState:
    def __init__(self, batch: int, cfg: GenerationConfig, forced_lengths: Optional[np.ndarray]):
        self.cfg = cfg
        self.finished = np.zeros(batch, dtype=bool)
        self.genl = np.zeros(batch, dtype=np.int64)
        self.emitted: List[np.ndarray] = []
        self.cache = None
        self.step = 0
        self.forced = forced_lengths

    def advance(self, logits: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        scores = logits
        if self.forced is not None:
            position = self.step + 1
            scores = logits.copy()
            scores[self.forced > position, cfg.eos_id] = -np.inf
        chosen = np.argmax(scores, axis=-1)
        if self.forced is not None:
            chosen = np.where(self.forced == self.step + 1, cfg.eos_id, chosen)
        chosen = np.where(self.finished, cfg.pad_id, chosen)
        self.genl += ~self.finished
        self.finished |= chosen == cfg.eos_id
        self.emitted.append(chosen)
        self.step += 1
        return chosen

    @property
    def done(self) -> bool:
        return bool(self.finished.all())


def _check_inputs(inputs: Sequence[Sequence[int]], cfg: GenerationConfig, forced_lengths) -> Optional[np.ndarray]:
    if len(inputs) == 0:
        raise GenerationError("empty batch")
    if any(len(seq) == 0 for seq in inputs):
        raise GenerationError("batch contains an empty input sequence")
    if forced_lengths is None:
        return None
    forced = np.asarray(forced_lengths, dtype=np.int64)
    if forced.shape != (len(inputs),):
        raise GenerationError(f"forced lengths {forced.shape} do not match batch of {len(inputs)}")
    if forced.min() < 1 or forced.max() > cfg.max_new_tokens:
        raise GenerationError(f"forced lengths must lie in [1, {cfg.max_new_tokens}]")
    return forced


def _run(
    weights: ModelWeights,
    inputs: Sequence[Sequence[int]],
    cfg: GenerationConfig,
    forced_lengths,
    capture_logits: bool,
    cached: bool,
) -> GenerationResult:
    forced = _check_inputs(inputs, cfg, forced_lengths)
    batch = len(inputs)
    max_len = min(cfg.max_input_len, weights.config.max_input_len)
    captured: Optional[List[np.ndarray]] = [] if capture_logits else None
    truncated = sum(len(seq) > max_len for seq in inputs)
    if truncated:
        log_kv(logger, logging.WARNING, "truncated_inputs", count=truncated, batch=batch, max_input_len=max_len)
    decoder_times: List[float] = []

    with no_grad():
        start = time.perf_counter()
        ids, mask = pad_batch([list(seq) for seq in inputs], cfg.pad_id, max_len)
        hidden = encode(weights, ids, mask)
        encoder_time = time.perf_counter() - start

        state = BatchState(batch, cfg, forced)
        token = np.full(batch, cfg.bos_id, dtype=np.int64)
        prefix = [token]
        for _ in range(cfg.max_new_tokens):
            tick = time.perf_counter()
            if cached:
                logits, state.cache = decode_step(weights, hidden, state.cache, token, mask)
                scores = logits.data
            else:
                scores = decode_full(weights, hidden, np.stack(prefix, axis=1), mask).data[:, -1]
            if captured is not None:
                captured.append(scores.copy())
            token = state.advance(scores)
            prefix.append(token)
            decoder_times.append(time.perf_counter() - tick)
            if state.done:
                break

    sequences = np.stack(state.emitted, axis=1).tolist()
    trace = GenerationTrace(encoder_time=encoder_time, decoder_times=decoder_times, genl=state.genl.tolist())
    logger.debug(f"generated batch of {batch} in {trace.steps} steps (cached={cached})")
    return GenerationResult(sequences=sequences, trace=trace, step_logits=captured)


def generate(
    weights: ModelWeights,
    inputs: Sequence[Sequence[int]],
    cfg: Optional[GenerationConfig] = None,
    *,
    forced_lengths: Optional[Sequence[int]] = None,
    capture_logits: bool = False,
) -> GenerationResult:
    """Greedy decoding with a KV cache.

    `forced_lengths` pins each sequence's GenL: EOS is suppressed before that step
    and emitted at it, so benchmark workloads run a fixed number of steps.
    """
    return _run(weights, inputs, cfg or GenerationConfig(), forced_lengths, capture_logits, cached=True)


def generate_uncached(
    weights: ModelWeights,
    inputs: Sequence[Sequence[int]],
    cfg: Optional[GenerationConfig] = None,
    *,
    forced_lengths: Optional[Sequence[int]] = None,
    capture_logits: bool = False,
) -> GenerationResult:
    """Reference decoder that recomputes attention over the whole prefix every step."""
    return _run(weights, inputs, cfg or GenerationConfig(), forced_lengths, capture_logits, cached=False)


def mean_genl(traces: Iterable[GenerationTrace]) -> float:
    lengths = [n for trace in traces for n in trace.genl]
    if not lengths:
        raise GenerationError("no generation traces to average")
    return float(np.mean(lengths))


def strip_generated(sequence: Sequence[int], eos_id: int, pad_id: int) -> List[int]:
    """Emitted summary tokens up to the first EOS or pad, which ends the summary."""
    out: List[int] = []
    for token in sequence:
        if token == eos_id or token == pad_id:
            break
        out.append(int(token))
    return out


def generate_in_batches(
    weights: ModelWeights,
    inputs: Sequence[Sequence[int]],
    cfg: GenerationConfig,
    batch_size: int,
) -> List[GenerationResult]:
    if batch_size < 1:
        raise GenerationError(f"batch size must be >= 1, got {batch_size}")
    return [generate(weights, inputs[i:i + batch_size], cfg) for i in range(0, len(inputs), batch_size)]
