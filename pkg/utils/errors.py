"""Error hierarchy shared by every package.

Each class carries a stable `code` so the CLI can print one machine-parsable line.
"""

from typing import Optional


class AsymPruneError(Exception):
    code = "asymprune"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        text = self.message.replace("\n", " ").replace('"', "'")
        return f'error code={self.code} message="{text}"'


class ConfigError(AsymPruneError):
    code = "config"

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class ShapeError(AsymPruneError):
    code = "shape"


class NonFiniteError(AsymPruneError):
    code = "non_finite"


class TapeError(AsymPruneError):
    code = "tape"


class EmptyLossError(AsymPruneError):
    code = "empty_loss"


class PruneSpecError(AsymPruneError):
    code = "prune_spec"


class CacheMismatchError(AsymPruneError):
    code = "cache_mismatch"


class GenerationError(AsymPruneError):
    code = "generation"


class CorpusFormatError(AsymPruneError):
    code = "corpus_format"

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class EmptyCorpusError(AsymPruneError):
    code = "empty_corpus"


class MetricError(AsymPruneError):
    code = "metric"


class BenchmarkError(AsymPruneError):
    code = "benchmark"


class RankDeficientError(AsymPruneError):
    code = "rank_deficient"


class TrainingDivergedError(AsymPruneError):
    code = "diverged"

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


class OptimizerError(AsymPruneError):
    code = "optimizer"

    def __init__(self, message: str, parameter: str):
        super().__init__(f"{parameter}: {message}")
        self.parameter = parameter


class CheckpointError(AsymPruneError):
    code = "checkpoint"


class RecordError(AsymPruneError):
    code = "record"
