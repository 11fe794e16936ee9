import numpy as np

from corpus.schemas import Corpus, CorpusStats
from utils.errors import EmptyCorpusError

STATS_HEADER = "| Dataset | Train | Validation | Test | Source | Summary | Compression |\n|---|---|---|---|---|---|---|"


def stats(corpus: Corpus) -> CorpusStats:
    if len(corpus) == 0:
        raise EmptyCorpusError("corpus has no pairs")
    source = np.array([len(p.source) for p in corpus.pairs], dtype=np.float64)
    summary = np.array([len(p.summary) for p in corpus.pairs], dtype=np.float64)
    return CorpusStats(
        n_train=len(corpus.train_idx),
        n_valid=len(corpus.valid_idx),
        n_test=len(corpus.test_idx),
        mean_source_len=float(source.mean()),
        mean_summary_len=float(summary.mean()),
        compression_factor=float(np.mean(source / summary)),
    )


def format_stats_row(name: str, row: CorpusStats) -> str:
    return (
        f"| {name} | {row.n_train:,} | {row.n_valid:,} | {row.n_test:,} | "
        f"{row.mean_source_len:.2f} | {row.mean_summary_len:.2f} | {row.compression_factor:.2f} |"
    )
