"""Token-level ROUGE over id sequences.

No stemming or stopword handling: scores are comparable only across runs that share a
tokenization.
"""

from collections import Counter
from typing import List, Optional, Sequence, Set

import numpy as np

from eval_metrics.schemas import PRF
from utils.errors import MetricError

Tokens = Sequence[int]


def ngram_counts(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Tokens, reference: Tokens, n: int) -> PRF:
    if n < 1:
        raise MetricError(f"n must be >= 1, got {n}")
    cand = ngram_counts(candidate, n)
    ref = ngram_counts(reference, n)
    overlap = sum((cand & ref).values())
    return PRF.from_counts(overlap, sum(cand.values()), sum(ref.values()))


def lcs_table(x: Tokens, y: Tokens) -> np.ndarray:
    """(len(x)+1) x (len(y)+1) table of LCS lengths of prefixes."""
    table = np.zeros((len(x) + 1, len(y) + 1), dtype=np.int64)
    for i in range(1, len(x) + 1):
        for j in range(1, len(y) + 1):
            if x[i - 1] == y[j - 1]:
                table[i, j] = table[i - 1, j - 1] + 1
            else:
                table[i, j] = max(table[i - 1, j], table[i, j - 1])
    return table


def lcs_length(x: Tokens, y: Tokens) -> int:
    if not x or not y:
        return 0
    return int(lcs_table(x, y)[-1, -1])


def rouge_l_sentence(candidate: Tokens, reference: Tokens) -> PRF:
    return PRF.from_counts(lcs_length(candidate, reference), len(candidate), len(reference))


def lcs_hits(reference: Tokens, candidate: Tokens) -> Set[int]:
    """Reference positions on one LCS; on ties the walk moves along the reference first."""
    hits: Set[int] = set()
    if not reference or not candidate:
        return hits
    table = lcs_table(reference, candidate)
    i, j = len(reference), len(candidate)
    while i > 0 and j > 0:
        if reference[i - 1] == candidate[j - 1]:
            i -= 1
            j -= 1
            hits.add(i)
        elif table[i - 1, j] >= table[i, j - 1]:
            i -= 1
        else:
            j -= 1
    return hits


def rouge_lsum(candidate_sentences: List[Tokens], reference_sentences: List[Tokens]) -> PRF:
    """Summary-level LCS: per reference sentence, the union of its LCS hits against every
    candidate sentence, each hit clipped by the remaining unigram counts of both sides."""
    cand_counts = Counter(t for sent in candidate_sentences for t in sent)
    ref_counts = Counter(t for sent in reference_sentences for t in sent)
    cand_total = sum(cand_counts.values())
    ref_total = sum(ref_counts.values())
    if cand_total == 0 or ref_total == 0:
        return PRF()

    overlap = 0
    for ref_sent in reference_sentences:
        union: Set[int] = set()
        for cand_sent in candidate_sentences:
            union |= lcs_hits(ref_sent, cand_sent)
        for position in sorted(union):
            token = ref_sent[position]
            if cand_counts[token] > 0 and ref_counts[token] > 0:
                cand_counts[token] -= 1
                ref_counts[token] -= 1
                overlap += 1
    return PRF.from_counts(overlap, cand_total, ref_total)


def split_sentences(tokens: Tokens, separator: Optional[int]) -> List[List[int]]:
    """Split on the sentence separator id, dropping empty sentences."""
    if separator is None:
        return [list(tokens)] if len(tokens) else []
    sentences: List[List[int]] = [[]]
    for token in tokens:
        if token == separator:
            sentences.append([])
        else:
            sentences[-1].append(int(token))
    return [s for s in sentences if s]


def strip_separators(tokens: Tokens, separator: Optional[int]) -> List[int]:
    return [int(t) for t in tokens if separator is None or t != separator]
