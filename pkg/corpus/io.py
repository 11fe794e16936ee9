"""Corpus files.

TSV: one pair per line, source and summary separated by a tab, tokens by whitespace.
A sentence break inside a text is written as the two characters backslash and n.

Cache: magic b"ASYMCORP", u16 version, then a zstd-compressed orjson document.
"""

import logging
import os
import struct
from pathlib import Path
from typing import List, Optional, Union

import orjson
import xxhash
import zstandard

from corpus.schemas import NEWLINE_TOKEN, Corpus, Pair, Vocabulary
from corpus.synth import split_indices
from utils.digest import sequences_digest
from utils.errors import CorpusFormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CACHE_MAGIC = b"ASYMCORP"
CACHE_VERSION = 1
_ESCAPED_BREAK = "\\n"


def tokenize(text: str) -> List[str]:
    return text.replace(_ESCAPED_BREAK, f" {NEWLINE_TOKEN} ").split()


def detokenize(words: List[str]) -> str:
    return " ".join(_ESCAPED_BREAK if w == NEWLINE_TOKEN else w for w in words)


def _read_lines(path: PathLike) -> List[str]:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusFormatError(f"cannot read {path}: {exc}") from exc


def load_tsv(path: PathLike, vocab: Optional[Vocabulary] = None, seed: int = 0) -> Corpus:
    """Parse a TSV corpus. Without `vocab` one is built from the file's words in order of appearance."""
    rows = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        fields = line.split("\t")
        if len(fields) != 2:
            raise CorpusFormatError(f"expected 2 tab-separated fields, found {len(fields)}", line=lineno)
        source, summary = tokenize(fields[0]), tokenize(fields[1])
        if not source or not summary:
            raise CorpusFormatError("empty source or summary", line=lineno)
        rows.append((source, summary))

    if vocab is None:
        vocab = Vocabulary.from_words(word for row in rows for side in row for word in side)
    pairs = [Pair(source=vocab.encode(src), summary=vocab.encode(summ)) for src, summ in rows]
    train, valid, test = split_indices(len(pairs), seed)
    logger.info(f"Loaded {len(pairs)} pairs from {path} (vocab {len(vocab)})")
    return Corpus(vocab=vocab, pairs=pairs, train_idx=train, valid_idx=valid, test_idx=test)


def load_column(path: PathLike, column: int = -1) -> List[List[str]]:
    """Tokenized text from one column of a TSV file (the last one by default)."""
    texts = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        fields = line.split("\t")
        try:
            texts.append(tokenize(fields[column]))
        except IndexError:
            raise CorpusFormatError(f"no column {column}", line=lineno) from None
    return texts


def write_tsv(corpus: Corpus, path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for pair in corpus.pairs:
            source = detokenize(corpus.vocab.decode(pair.source))
            summary = detokenize(corpus.vocab.decode(pair.summary))
            f.write(f"{source}\t{summary}\n")


def save_cache(corpus: Corpus, path: PathLike) -> None:
    document = {
        "vocab": corpus.vocab.tokens,
        "pairs": [[p.source, p.summary] for p in corpus.pairs],
        "train": corpus.train_idx,
        "valid": corpus.valid_idx,
        "test": corpus.test_idx,
    }
    body = zstandard.ZstdCompressor(level=3).compress(orjson.dumps(document))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(CACHE_MAGIC + struct.pack("<H", CACHE_VERSION) + body)
    os.replace(tmp, path)


def load_cache(path: PathLike) -> Corpus:
    with open(path, "rb") as f:
        payload = f.read()
    if payload[:8] != CACHE_MAGIC:
        raise CorpusFormatError(f"{path} is not a corpus cache")
    (version,) = struct.unpack_from("<H", payload, 8)
    if version != CACHE_VERSION:
        raise CorpusFormatError(f"unsupported corpus cache version {version}")
    try:
        document = orjson.loads(zstandard.ZstdDecompressor().decompress(payload[10:]))
    except (zstandard.ZstdError, orjson.JSONDecodeError) as exc:
        raise CorpusFormatError(f"corrupt corpus cache {path}: {exc}") from exc
    return Corpus(
        vocab=Vocabulary(tokens=document["vocab"]),
        pairs=[Pair(source=src, summary=summ) for src, summ in document["pairs"]],
        train_idx=document["train"],
        valid_idx=document["valid"],
        test_idx=document["test"],
    )


def corpus_digest(corpus: Corpus) -> str:
    """Equal digests mean identical vocabulary, token sequences and splits."""
    h = xxhash.xxh3_64()
    h.update(orjson.dumps(corpus.vocab.tokens))
    h.update(sequences_digest(p.source for p in corpus.pairs).encode())
    h.update(sequences_digest(p.summary for p in corpus.pairs).encode())
    h.update(orjson.dumps([corpus.train_idx, corpus.valid_idx, corpus.test_idx]))
    return h.hexdigest()
