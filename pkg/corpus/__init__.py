"""Synthetic and TSV summarization corpora."""

__all__ = [
    "Corpus",
    "CorpusStats",
    "Pair",
    "SynthSpec",
    "SynthTask",
    "Vocabulary",
    "synth_generate",
    "synth_from_spec",
    "load_tsv",
    "write_tsv",
    "save_cache",
    "load_cache",
    "corpus_digest",
    "stats",
    "format_stats_row",
]

_SCHEMAS = ("Corpus", "CorpusStats", "Pair", "SynthSpec", "SynthTask", "Vocabulary")
_IO = ("load_tsv", "write_tsv", "save_cache", "load_cache", "corpus_digest")


def __getattr__(name):
    if name in _SCHEMAS:
        from corpus import schemas
        return getattr(schemas, name)
    if name in ("synth_generate", "synth_from_spec"):
        from corpus import synth
        return getattr(synth, name)
    if name in _IO:
        from corpus import io
        return getattr(io, name)
    if name in ("stats", "format_stats_row"):
        from corpus.statistics import format_stats_row, stats
        return {"stats": stats, "format_stats_row": format_stats_row}[name]
    raise AttributeError(name)
