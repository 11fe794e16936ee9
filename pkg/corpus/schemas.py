from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from seq2seq_model.schemas import NUM_SPECIAL, UNK_ID
from utils.errors import ConfigError, CorpusFormatError

SPECIAL_TOKENS = ["<pad>", "</s>", "<s>", "<unk>"]
SENTINEL_TOKEN = "<k>"
NEWLINE_TOKEN = "<n>"
SPLIT_FRACTIONS = (0.8, 0.1, 0.1)


class SynthTask(str, Enum):
    KEYWORD_EXTRACT = "KeywordExtract"
    LEAD_K = "LeadK"
    SORTED_UNIQUE = "SortedUnique"


class Vocabulary(BaseModel):
    """Token strings indexed by id; the first four are always the special tokens."""

    tokens: List[str] = Field(description="Token string for each id")
    _index: Dict[str, int] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context) -> None:
        if self.tokens[:NUM_SPECIAL] != SPECIAL_TOKENS:
            raise CorpusFormatError(f"vocabulary must start with {SPECIAL_TOKENS}")
        if len(set(self.tokens)) != len(self.tokens):
            raise CorpusFormatError("vocabulary has duplicate tokens")
        self._index = {token: i for i, token in enumerate(self.tokens)}

    @classmethod
    def synthetic(cls, vocab_size: int, sentinel: bool = False) -> "Vocabulary":
        extra = [SENTINEL_TOKEN] if sentinel else []
        n_symbols = vocab_size - NUM_SPECIAL - len(extra)
        if n_symbols < 2:
            raise ConfigError(f"vocab_size {vocab_size} leaves {n_symbols} symbols, need at least 2", field="vocab_size")
        start = NUM_SPECIAL + len(extra)
        return cls(tokens=SPECIAL_TOKENS + extra + [f"s{i}" for i in range(start, vocab_size)])

    @classmethod
    def from_words(cls, words) -> "Vocabulary":
        seen = dict.fromkeys(SPECIAL_TOKENS + [NEWLINE_TOKEN])
        for word in words:
            seen.setdefault(word)
        return cls(tokens=list(seen))

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self._index.get(token, UNK_ID)

    def encode(self, words: List[str]) -> List[int]:
        return [self.id_of(w) for w in words]

    def decode(self, ids: List[int]) -> List[str]:
        return [self.tokens[i] if 0 <= i < len(self.tokens) else SPECIAL_TOKENS[UNK_ID] for i in ids]

    @property
    def sentinel_id(self) -> Optional[int]:
        return self._index.get(SENTINEL_TOKEN)

    @property
    def newline_id(self) -> Optional[int]:
        return self._index.get(NEWLINE_TOKEN)

    @property
    def symbol_ids(self) -> List[int]:
        """Ids of ordinary tokens (no specials, sentinel or sentence separator)."""
        reserved = {SENTINEL_TOKEN, NEWLINE_TOKEN}
        return [i for i in range(NUM_SPECIAL, len(self.tokens)) if self.tokens[i] not in reserved]


class Pair(BaseModel):
    """One source document and its reference summary, as token ids."""

    model_config = ConfigDict(frozen=True)

    source: List[int]
    summary: List[int]

    @field_validator("source", "summary")
    @classmethod
    def _non_empty(cls, value: List[int]) -> List[int]:
        if not value:
            raise CorpusFormatError("pair sides must be non-empty")
        return value


class Corpus(BaseModel):
    vocab: Vocabulary
    pairs: List[Pair] = Field(default_factory=list, description="All pairs in file/generation order")
    train_idx: List[int] = Field(default_factory=list)
    valid_idx: List[int] = Field(default_factory=list)
    test_idx: List[int] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pairs)

    def split(self, name: str) -> List[Pair]:
        indices = {"train": self.train_idx, "valid": self.valid_idx, "test": self.test_idx}.get(name)
        if indices is None:
            raise ValueError(f"unknown split {name!r}")
        return [self.pairs[i] for i in indices]

    @property
    def train(self) -> List[Pair]:
        return self.split("train")

    @property
    def valid(self) -> List[Pair]:
        return self.split("valid")

    @property
    def test(self) -> List[Pair]:
        return self.split("test")


class SynthSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    task: SynthTask = Field(default=SynthTask.LEAD_K)
    seed: int = Field(default=0)
    n_pairs: int = Field(default=200, ge=1)
    vocab_size: int = Field(default=32, description="Model vocabulary size, specials included")
    src_len_range: Tuple[int, int] = Field(default=(16, 32), description="Inclusive source length bounds")
    compression_target: float = Field(default=4.0, description="Target source/summary length ratio")

    @model_validator(mode="after")
    def _check(self) -> "SynthSpec":
        if self.compression_target <= 1:
            raise ConfigError(f"must be > 1, got {self.compression_target}", field="compression_target")
        lo, hi = self.src_len_range
        if lo < 2 or hi < lo:
            raise ConfigError(f"invalid range {self.src_len_range}", field="src_len_range")
        return self


class CorpusStats(BaseModel):
    n_train: int
    n_valid: int
    n_test: int
    mean_source_len: float
    mean_summary_len: float
    compression_factor: float = Field(description="Mean over pairs of source_len / summary_len")
