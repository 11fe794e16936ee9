import logging
from typing import List, Optional, Sequence, Tuple

from corpus.schemas import Pair, Vocabulary
from eval_metrics.comparison import evaluate_generations
from eval_metrics.schemas import RougeScores
from generation_engine.engine import generate_in_batches
from generation_engine.schemas import GenerationConfig
from seq2seq_model.schemas import ModelWeights
from stf_pipeline.schemas import EvaluationSettings
from utils.errors import EmptyCorpusError

logger = logging.getLogger(__name__)


def default_max_new_tokens(pairs: Sequence[Pair]) -> int:
    return 2 * max(len(p.summary) for p in pairs) + 1


def summarize(
    weights: ModelWeights,
    sources: Sequence[Sequence[int]],
    *,
    max_new_tokens: int,
    batch_size: int = 16,
) -> Tuple[List[List[int]], List[int]]:
    """Greedy summaries (EOS and padding stripped) and the GenL of each."""
    cfg = GenerationConfig(max_input_len=weights.config.max_input_len, max_new_tokens=max_new_tokens)
    results = generate_in_batches(weights, list(sources), cfg, batch_size)
    summaries = [summary for result in results for summary in result.summaries(cfg.eos_id, cfg.pad_id)]
    genl = [n for result in results for n in result.trace.genl]
    return summaries, genl


def evaluate_model(
    weights: ModelWeights,
    pairs: Sequence[Pair],
    vocab: Vocabulary,
    options: Optional[EvaluationSettings] = None,
) -> RougeScores:
    """Corpus ROUGE of greedy summaries against the reference summaries of `pairs`."""
    if not pairs:
        raise EmptyCorpusError("no pairs to evaluate")
    options = options or EvaluationSettings()
    max_new = options.max_new_tokens or default_max_new_tokens(pairs)
    hypotheses, genl = summarize(weights, [p.source for p in pairs], max_new_tokens=max_new, batch_size=options.batch_size)
    scores = evaluate_generations(hypotheses, [p.summary for p in pairs], separator=vocab.newline_id, genl=genl)
    logger.info(
        f"Evaluated {weights.config.n_enc_layers}+{weights.config.n_dec_layers} layers on {len(pairs)} pairs: "
        f"R-1 {scores.r1.f1:.4f} R-2 {scores.r2.f1:.4f} R-L {scores.rl.f1:.4f} GenL {scores.genl:.2f}"
    )
    return scores
