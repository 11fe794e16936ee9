"""YAML experiment files.

Example::

    name: toy-grid
    seed: 0
    scales:
      - tag: toy-small
        preset: toy-small
      - tag: wide
        dims: {d_model: 64, n_heads: 4, d_kv: 16, d_ff: 128, n_enc_layers: 6, n_dec_layers: 6}
    corpus:
      synth: {task: KeywordExtract, n_pairs: 400, vocab_size: 32}
    hyperparams: {effective_batch: 64, micro_batch: 8, learning_rate: 0.003, epochs: 10}
    finetune: {enabled: true, same_hyperparams: true}
    grid: true
    strategy: EvenlySpaced
    bench: {batch_sizes: [1, 8], runs: 5, input_len: 128, new_tokens: 32}
    output_dir: runs/toy-grid

Unknown keys at any level are rejected and named in the error.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from corpus.io import load_cache, load_tsv
from corpus.schemas import Corpus, SynthSpec
from corpus.synth import synth_from_spec
from seq2seq_model.Config import build_config
from seq2seq_model.schemas import ModelConfig
from stf_pipeline.schemas import BenchSettings, EvaluationSettings, FinetuneSettings, Hyperparams, ScaleConfig
from structural_pruning.pruning import enumerate_grid
from structural_pruning.schemas import PruneSpec, RetentionStrategy
from utils.errors import ConfigError
from utils.settings import settings

logger = logging.getLogger(__name__)

CACHE_SUFFIX = ".corpus"


class ScaleEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tag: str = Field(description="Scale name used in record names")
    preset: Optional[str] = Field(default=None, description="Named preset from seq2seq_model.Config")
    dims: Dict[str, Any] = Field(default_factory=dict, description="ModelConfig fields, overriding the preset")

    def build(self, vocab_size: int) -> ScaleConfig:
        values = {"vocab_size": vocab_size, **self.dims}
        config = build_config(self.preset, **values) if self.preset else ModelConfig.from_mapping(values)
        return ScaleConfig(tag=self.tag, config=config)


class CorpusSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: Optional[str] = Field(default=None, description="TSV file, or a `.corpus` cache")
    synth: Optional[Dict[str, Any]] = Field(default=None, description="SynthSpec fields")

    @model_validator(mode="after")
    def _one_source(self) -> "CorpusSection":
        if (self.path is None) == (self.synth is None):
            raise ConfigError("give exactly one of path and synth", field="corpus")
        if self.synth is not None:
            unknown = sorted(set(self.synth) - set(SynthSpec.model_fields))
            if unknown:
                raise ConfigError("unknown key", field=f"corpus.synth.{unknown[0]}")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    seed: int = Field(default=0, description="Overrides hyperparams.seed and the synthetic corpus seed")
    scales: List[ScaleEntry] = Field(default_factory=lambda: [ScaleEntry(tag="toy-small", preset="toy-small")])
    corpus: CorpusSection
    hyperparams: Dict[str, Any] = Field(default_factory=dict, description="Hyperparams fields")
    finetune: FinetuneSettings = Field(default_factory=FinetuneSettings)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)
    grid: bool = Field(default=True, description="Derive the pruned variants; off trains baselines only")
    strategy: RetentionStrategy = Field(default=RetentionStrategy.EVENLY_SPACED)
    bench: BenchSettings = Field(default_factory=BenchSettings)
    output_dir: Optional[str] = Field(default=None, description="Defaults to <runs_dir>/<name>")

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if not self.scales:
            raise ConfigError("at least one scale is required", field="scales")
        tags = [s.tag for s in self.scales]
        if len(set(tags)) != len(tags):
            raise ConfigError(f"duplicate tags in {tags}", field="scales")
        unknown = sorted(set(self.hyperparams) - set(Hyperparams.model_fields))
        if unknown:
            raise ConfigError("unknown key", field=f"hyperparams.{unknown[0]}")
        return self

    def hyper(self) -> Hyperparams:
        return Hyperparams(**{**self.hyperparams, "seed": self.seed})

    def load_corpus(self) -> Corpus:
        if self.corpus.path is not None:
            path = Path(self.corpus.path)
            if path.suffix == CACHE_SUFFIX:
                return load_cache(path)
            return load_tsv(path, seed=self.seed)
        return synth_from_spec(SynthSpec(**{"seed": self.seed, **self.corpus.synth}))

    def scale_configs(self, vocab_size: int) -> List[ScaleConfig]:
        return [entry.build(vocab_size) for entry in self.scales]

    def specs_for(self, config: ModelConfig) -> List[PruneSpec]:
        """Pruned variants to derive from a baseline of this shape (baseline excluded)."""
        return grid_specs(config, self.strategy) if self.grid else []

    def run_dir(self) -> Path:
        return Path(self.output_dir) if self.output_dir else Path(settings.runs_dir) / self.name


def parse_experiment_config(values: Any) -> ExperimentConfig:
    if not isinstance(values, dict):
        raise ConfigError("experiment config must be a mapping")
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ())) or None
        message = "unknown key" if first.get("type") == "extra_forbidden" else first.get("msg", "invalid value")
        raise ConfigError(message, field=field) from e


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        values = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist", field="config") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}", field="config") from exc
    config = parse_experiment_config(values)
    logger.info(f"Loaded experiment {config.name} from {path}: {len(config.scales)} scale(s), grid={config.grid}")
    return config


def grid_specs(config: ModelConfig, strategy: RetentionStrategy = RetentionStrategy.EVENLY_SPACED) -> List[PruneSpec]:
    """Pruned variants of a baseline with this shape, baseline excluded."""
    if config.n_enc_layers != config.n_dec_layers:
        raise ConfigError("the pruning grid needs equally deep stacks", field="scales")
    return [spec.model_copy(update={"strategy": strategy}) for spec in enumerate_grid(config.n_enc_layers)[1:]]
