from operator import add
from typing import Annotated, Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from bench_harness.schemas import LatencyReport
from corpus.schemas import Corpus
from eval_metrics.schemas import Comparison, RougeScores
from seq2seq_model.schemas import ModelConfig, ModelWeights
from stf_pipeline.Config import BENCHMARK_CONFIG, EVALUATION_CONFIG, FINETUNE_CONFIG, QUICK_BENCHMARK_CONFIG, TRAIN_CONFIG
from structural_pruning.schemas import PruneSpec
from tensor_autodiff.schemas import OptimizerConfig
from utils.errors import ConfigError


class Hyperparams(BaseModel):
    """Training hyperparameters; the effective batch is reached by accumulating micro-batches."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    effective_batch: int = Field(default=TRAIN_CONFIG["effective_batch"], description="Examples per optimizer step")
    micro_batch: int = Field(default=TRAIN_CONFIG["micro_batch"], description="Examples per forward/backward pass")
    learning_rate: float = Field(default=TRAIN_CONFIG["learning_rate"], description="Constant learning rate")
    weight_decay: float = Field(default=TRAIN_CONFIG["weight_decay"])
    epochs: int = Field(default=TRAIN_CONFIG["epochs"], description="Epoch cap")
    patience: int = Field(default=TRAIN_CONFIG["patience"], description="Evaluations without improvement before stopping")
    seed: int = Field(default=0)
    max_steps: Optional[int] = Field(default=None, description="Optional cap on optimizer steps; 0 leaves weights untouched")

    @model_validator(mode="after")
    def _check(self) -> "Hyperparams":
        for name in ("effective_batch", "micro_batch", "epochs", "patience"):
            if getattr(self, name) < 1:
                raise ConfigError(f"must be >= 1, got {getattr(self, name)}", field=name)
        if self.effective_batch % self.micro_batch:
            raise ConfigError(
                f"micro batch {self.micro_batch} does not divide effective batch {self.effective_batch}",
                field="micro_batch",
            )
        if self.learning_rate <= 0:
            raise ConfigError(f"must be > 0, got {self.learning_rate}", field="learning_rate")
        if self.weight_decay < 0:
            raise ConfigError(f"must be >= 0, got {self.weight_decay}", field="weight_decay")
        if self.max_steps is not None and self.max_steps < 0:
            raise ConfigError(f"must be >= 0, got {self.max_steps}", field="max_steps")
        return self

    @property
    def accumulation_steps(self) -> int:
        return self.effective_batch // self.micro_batch

    def optimizer(self) -> OptimizerConfig:
        return OptimizerConfig(learning_rate=self.learning_rate, weight_decay=self.weight_decay)


class FinetuneSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    enabled: bool = Field(default=FINETUNE_CONFIG["enabled"], description="Re-fine-tune pruned variants")
    same_hyperparams: bool = Field(default=FINETUNE_CONFIG["same_hyperparams"])
    hyperparams: Optional[Hyperparams] = Field(default=None, description="Used when same_hyperparams is off")

    def resolve(self, baseline: Hyperparams) -> Hyperparams:
        if self.same_hyperparams or self.hyperparams is None:
            return baseline
        return self.hyperparams


class EvaluationSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    batch_size: int = Field(default=EVALUATION_CONFIG["batch_size"], ge=1)
    max_new_tokens: Optional[int] = Field(default=EVALUATION_CONFIG["max_new_tokens"], ge=1)


class BenchSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    enabled: bool = Field(default=BENCHMARK_CONFIG["enabled"])
    batch_sizes: List[int] = Field(default_factory=lambda: list(BENCHMARK_CONFIG["batch_sizes"]))
    runs: int = Field(default=BENCHMARK_CONFIG["runs"], ge=1)
    warmup: int = Field(default=BENCHMARK_CONFIG["warmup"], ge=0)
    size: int = Field(default=BENCHMARK_CONFIG["size"], ge=1)
    input_len: int = Field(default=BENCHMARK_CONFIG["input_len"], ge=1)
    new_tokens: int = Field(default=BENCHMARK_CONFIG["new_tokens"], ge=1)
    stragglers: bool = Field(default=BENCHMARK_CONFIG["stragglers"])
    quick: bool = Field(default=False, description="Fill unset fields from the smoke-test settings instead of the protocol")

    @model_validator(mode="before")
    @classmethod
    def _quick_defaults(cls, values: Any) -> Any:
        if isinstance(values, dict) and values.get("quick"):
            return {**QUICK_BENCHMARK_CONFIG, **values}
        return values

    @model_validator(mode="after")
    def _check(self) -> "BenchSettings":
        if not self.batch_sizes or min(self.batch_sizes) < 1:
            raise ConfigError(f"need positive batch sizes, got {self.batch_sizes}", field="batch_sizes")
        return self


class TrainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    weights: ModelWeights
    curve: List[float] = Field(default_factory=list, description="Mean training loss per optimizer step")
    valid_losses: List[float] = Field(default_factory=list, description="Validation loss after each epoch")
    steps: int = Field(default=0)
    epochs_run: int = Field(default=0)
    best_valid_loss: Optional[float] = Field(default=None)
    stopped_early: bool = Field(default=False)


class ExperimentRecord(BaseModel):
    """One grid cell: which layers survived, how well the variant summarizes and how fast it runs."""

    run_name: str
    scale: str = Field(description="Model scale tag")
    base_layers: Tuple[int, int] = Field(description="(n_enc, n_dec) of the unpruned model")
    spec: PruneSpec
    retained_enc: List[int] = Field(description="Original encoder indices kept")
    retained_dec: List[int] = Field(description="Original decoder indices kept")
    params: int
    finetuned: bool
    seed: int
    scores: RougeScores
    comparison: Comparison = Field(description="R-2 F1 and BS1 latency against the baseline")
    latency: Dict[int, LatencyReport] = Field(default_factory=dict, description="Batch size -> report")
    speedups: Dict[int, float] = Field(default_factory=dict, description="Batch size -> speedup vs baseline")
    curve: List[float] = Field(default_factory=list, description="Loss per optimizer step while (re)training")

    @property
    def name(self) -> str:
        return f"{self.scale}-{self.spec.label()}"

    @property
    def series(self) -> str:
        """baseline, decoder (only the decoder pruned), encoder, or both."""
        n_enc, n_dec = self.base_layers
        enc_pruned = self.spec.enc_keep < n_enc
        dec_pruned = self.spec.dec_keep < n_dec
        if enc_pruned and dec_pruned:
            return "both"
        if dec_pruned:
            return "decoder"
        if enc_pruned:
            return "encoder"
        return "baseline"


class ScaleConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    tag: str
    config: ModelConfig


class VariantOutcome(BaseModel):
    """A pruned (and possibly re-fine-tuned) variant before benchmarking."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    index: int = Field(description="Position in the requested spec list")
    spec: PruneSpec
    weights: ModelWeights
    scores: RougeScores
    curve: List[float] = Field(default_factory=list)
    finetuned: bool = Field(default=False)


class GridState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    run_name: str = Field(description="Name of the run directory")
    scale: ScaleConfig
    corpus: Corpus
    hyper: Hyperparams = Field(default_factory=Hyperparams)
    finetune: FinetuneSettings = Field(default_factory=FinetuneSettings)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)
    bench: BenchSettings = Field(default_factory=BenchSettings)
    specs: List[PruneSpec] = Field(default_factory=list, description="Variants to derive from the baseline")
    output_dir: Optional[str] = Field(default=None, description="Run directory; nothing is written when unset")
    include_baseline: bool = Field(default=True, description="Emit a record for the baseline itself")
    baseline: Optional[ModelWeights] = Field(default=None, description="Trained here when not supplied")
    baseline_curve: List[float] = Field(default_factory=list)
    baseline_scores: Optional[RougeScores] = Field(default=None)
    variants: Annotated[List[VariantOutcome], add] = Field(default_factory=list)
    latency: Dict[str, Dict[int, LatencyReport]] = Field(default_factory=dict, description="Variant label -> reports")
    records: List[ExperimentRecord] = Field(default_factory=list)


class TrainedScale(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    index: int
    tag: str
    weights: ModelWeights
    scores: RougeScores
    curve: List[float] = Field(default_factory=list)


class ScalePoint(BaseModel):
    scale: str
    params: int
    r2_f1: float
    gain_pct: Optional[float] = Field(default=None, description="Relative R-2 F1 gain over the smallest scale; None when it scores zero")
    genl: float
    latency_ms: Dict[int, float] = Field(default_factory=dict, description="Batch size -> mean latency")
    latency_impact: Dict[int, float] = Field(default_factory=dict, description="Batch size -> latency / smallest latency")


class ScaleSweep(BaseModel):
    run_name: str
    points: List[ScalePoint] = Field(default_factory=list)


class SweepState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    run_name: str
    scales: List[ScaleConfig]
    corpus: Corpus
    hyper: Hyperparams = Field(default_factory=Hyperparams)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)
    bench: BenchSettings = Field(default_factory=BenchSettings)
    output_dir: Optional[str] = Field(default=None)
    trained: Annotated[List[TrainedScale], add] = Field(default_factory=list)
    latency: Dict[str, Dict[int, LatencyReport]] = Field(default_factory=dict, description="Scale tag -> reports")
    sweep: Optional[ScaleSweep] = Field(default=None)
