"""Synthetic summarization tasks small enough for a toy model to learn.

KeywordExtract marks tokens with sentinels on both sides and asks for them in order, so
the work sits in reading the source. SortedUnique asks for the sorted set of source
symbols, which puts the work in the decoder. LeadK copies a prefix.
"""

import logging
import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from corpus.schemas import SPLIT_FRACTIONS, Corpus, Pair, SynthSpec, SynthTask, Vocabulary
from utils.errors import ConfigError
from utils.rng import derive_seed, make_rng

logger = logging.getLogger(__name__)


def split_indices(n: int, seed: int) -> Tuple[List[int], List[int], List[int]]:
    """Seeded disjoint train/valid/test partition of `range(n)`."""
    order = make_rng(derive_seed(seed, "split")).permutation(n)
    n_train = int(n * SPLIT_FRACTIONS[0])
    n_valid = int(n * SPLIT_FRACTIONS[1])
    train = sorted(int(i) for i in order[:n_train])
    valid = sorted(int(i) for i in order[n_train:n_train + n_valid])
    test = sorted(int(i) for i in order[n_train + n_valid:])
    return train, valid, test


def source_length(k: int, spec: SynthSpec) -> int:
    lo, hi = spec.src_len_range
    target = int(math.floor(k * spec.compression_target + 0.5))
    return min(hi, max(lo, target, k + 1))


def summary_bounds(spec: SynthSpec, n_symbols: int) -> Tuple[int, int]:
    """Inclusive range of summary lengths compatible with the source range and target."""
    lo, hi = spec.src_len_range
    k_lo = max(1, math.ceil(lo / spec.compression_target))
    k_hi = math.floor(hi / spec.compression_target)
    if spec.task == SynthTask.SORTED_UNIQUE:
        k_hi = min(k_hi, n_symbols)
    if k_lo > k_hi:
        raise ConfigError(
            f"no summary length fits sources {spec.src_len_range} at compression {spec.compression_target}"
            f" with {n_symbols} symbols",
            field="src_len_range",
        )
    if spec.task == SynthTask.KEYWORD_EXTRACT:
        for k in range(k_lo, k_hi + 1):
            if 3 * k > source_length(k, spec):
                raise ConfigError(
                    f"{k} keyword triplets do not fit in {source_length(k, spec)} tokens",
                    field="compression_target",
                )
    return k_lo, k_hi


def lead_k(source: List[int], k: int) -> List[int]:
    return [int(s) for s in source[:k]]


def sorted_unique(source: List[int]) -> List[int]:
    return sorted({int(s) for s in source})


def extract_keywords(source: List[int], sentinel: int) -> List[int]:
    """Tokens with a sentinel on each side, left to right, triplets not overlapping."""
    out = []
    i = 0
    while i + 2 < len(source):
        if source[i] == sentinel and source[i + 2] == sentinel and source[i + 1] != sentinel:
            out.append(int(source[i + 1]))
            i += 3
        else:
            i += 1
    return out


def _lead_k(rng: np.random.Generator, symbols: np.ndarray, k: int, length: int, sentinel: int) -> Pair:
    source = rng.choice(symbols, size=length).tolist()
    return Pair(source=source, summary=lead_k(source, k))


def _sorted_unique(rng: np.random.Generator, symbols: np.ndarray, k: int, length: int, sentinel: int) -> Pair:
    chosen = rng.choice(symbols, size=k, replace=False)
    filler = rng.choice(chosen, size=length - k)
    source = rng.permutation(np.concatenate([chosen, filler])).tolist()
    return Pair(source=source, summary=sorted_unique(source))


def _keyword_extract(rng: np.random.Generator, symbols: np.ndarray, k: int, length: int, sentinel: int) -> Pair:
    source = rng.choice(symbols, size=length)
    slots = np.sort(rng.choice(length - 2 * k, size=k, replace=False))
    starts = slots + 2 * np.arange(k)
    source[starts] = sentinel
    source[starts + 2] = sentinel
    return Pair(source=source.tolist(), summary=extract_keywords(source.tolist(), sentinel))


_BUILDERS: Dict[SynthTask, Callable[..., Pair]] = {
    SynthTask.LEAD_K: _lead_k,
    SynthTask.SORTED_UNIQUE: _sorted_unique,
    SynthTask.KEYWORD_EXTRACT: _keyword_extract,
}


def synth_from_spec(spec: SynthSpec) -> Corpus:
    vocab = Vocabulary.synthetic(spec.vocab_size, sentinel=spec.task == SynthTask.KEYWORD_EXTRACT)
    symbols = np.asarray(vocab.symbol_ids, dtype=np.int64)
    k_lo, k_hi = summary_bounds(spec, len(symbols))
    rng = make_rng(derive_seed(spec.seed, "synth", spec.task.value))
    build = _BUILDERS[spec.task]
    sentinel = vocab.sentinel_id if vocab.sentinel_id is not None else -1

    pairs = []
    for _ in range(spec.n_pairs):
        k = int(rng.integers(k_lo, k_hi + 1))
        pairs.append(build(rng, symbols, k, source_length(k, spec), sentinel))

    train, valid, test = split_indices(len(pairs), spec.seed)
    logger.info(
        f"Generated {len(pairs)} {spec.task.value} pairs (vocab {spec.vocab_size}, "
        f"summary length {k_lo}-{k_hi}, split {len(train)}/{len(valid)}/{len(test)})"
    )
    return Corpus(vocab=vocab, pairs=pairs, train_idx=train, valid_idx=valid, test_idx=test)


def synth_generate(
    task: SynthTask,
    seed: int,
    n_pairs: int,
    vocab_size: int,
    src_len_range: Tuple[int, int] = (16, 32),
    compression_target: float = 4.0,
) -> Corpus:
    spec = SynthSpec(
        task=task,
        seed=seed,
        n_pairs=n_pairs,
        vocab_size=vocab_size,
        src_len_range=src_len_range,
        compression_target=compression_target,
    )
    return synth_from_spec(spec)
