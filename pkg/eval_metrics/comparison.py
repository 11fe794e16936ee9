import logging
from typing import List, Optional, Sequence

import numpy as np

from eval_metrics.rouge import rouge_l_sentence, rouge_lsum, rouge_n, split_sentences, strip_separators
from eval_metrics.schemas import PRF, Comparison, RougeScores
from utils.errors import MetricError

logger = logging.getLogger(__name__)


def compare(
    candidate_score: float,
    baseline_score: float,
    *,
    baseline_latency: Optional[float] = None,
    candidate_latency: Optional[float] = None,
) -> Comparison:
    if baseline_score <= 0:
        raise MetricError(f"baseline score must be positive, got {baseline_score}")
    ratio = candidate_score / baseline_score
    return Comparison(
        recall_pct=100.0 * ratio,
        impact_pct=100.0 * (ratio - 1.0),
        speedup=latency_speedup(baseline_latency, candidate_latency),
    )


def latency_speedup(baseline_latency: Optional[float], candidate_latency: Optional[float]) -> Optional[float]:
    """baseline / candidate latency, or None when either side was not measured."""
    if baseline_latency is None or candidate_latency is None:
        return None
    if baseline_latency <= 0 or candidate_latency <= 0:
        raise MetricError(f"latencies must be positive, got {baseline_latency} and {candidate_latency}")
    return baseline_latency / candidate_latency


def gain_pct(score: float, smallest: float) -> float:
    """Relative score gain over the smallest model, in percent."""
    if smallest <= 0:
        raise MetricError(f"reference score must be positive, got {smallest}")
    return 100.0 * (score / smallest - 1.0)


def latency_impact(latency: float, smallest_latency: float) -> float:
    """How many times slower than the smallest model at the same batch size."""
    if smallest_latency <= 0:
        raise MetricError(f"reference latency must be positive, got {smallest_latency}")
    return latency / smallest_latency


def _mean(scores: List[PRF]) -> PRF:
    return PRF(
        precision=float(np.mean([s.precision for s in scores])),
        recall=float(np.mean([s.recall for s in scores])),
        f1=float(np.mean([s.f1 for s in scores])),
    )


def evaluate_generations(
    hypotheses: Sequence[Sequence[int]],
    references: Sequence[Sequence[int]],
    *,
    separator: Optional[int] = None,
    genl: Optional[Sequence[int]] = None,
) -> RougeScores:
    """Corpus ROUGE as the mean of per-pair scores.

    Without `genl`, generation length is taken as hypothesis length plus the EOS token.
    """
    if len(hypotheses) != len(references):
        raise MetricError(f"{len(hypotheses)} hypotheses for {len(references)} references")
    if not hypotheses:
        raise MetricError("nothing to evaluate")

    r1, r2, rl, rlsum = [], [], [], []
    for hyp, ref in zip(hypotheses, references):
        flat_hyp = strip_separators(hyp, separator)
        flat_ref = strip_separators(ref, separator)
        r1.append(rouge_n(flat_hyp, flat_ref, 1))
        r2.append(rouge_n(flat_hyp, flat_ref, 2))
        rl.append(rouge_l_sentence(flat_hyp, flat_ref))
        rlsum.append(rouge_lsum(split_sentences(hyp, separator), split_sentences(ref, separator)))

    lengths = list(genl) if genl is not None else [len(strip_separators(h, separator)) + 1 for h in hypotheses]
    scores = RougeScores(
        r1=_mean(r1), r2=_mean(r2), rl=_mean(rl), rlsum=_mean(rlsum), genl=float(np.mean(lengths)),
    )
    logger.debug(f"Evaluated {len(hypotheses)} pairs: R-2 f1 {scores.r2.f1:.4f}")
    return scores
