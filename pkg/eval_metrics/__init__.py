__all__ = [
    "PRF",
    "RougeScores",
    "Comparison",
    "rouge_n",
    "rouge_l_sentence",
    "rouge_lsum",
    "compare",
    "gain_pct",
    "latency_impact",
    "latency_speedup",
    "evaluate_generations",
]


def __getattr__(name):
    if name in ("PRF", "RougeScores", "Comparison"):
        from eval_metrics import schemas
        return getattr(schemas, name)
    if name in ("rouge_n", "rouge_l_sentence", "rouge_lsum"):
        from eval_metrics import rouge
        return getattr(rouge, name)
    if name in ("compare", "gain_pct", "latency_impact", "latency_speedup", "evaluate_generations"):
        from eval_metrics import comparison
        return getattr(comparison, name)
    raise AttributeError(name)
