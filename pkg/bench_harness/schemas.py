from typing import Dict, List, Optional

import orjson
import xxhash
from pydantic import BaseModel, ConfigDict, Field

from generation_engine.schemas import GenerationConfig
from utils.digest import sequences_digest


class Workload(BaseModel):
    """Fixed inputs (and optionally a forced length per input) shared by every benchmarked model."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(default="workload")
    inputs: List[List[int]]
    forced_lengths: Optional[List[int]] = Field(default=None, description="GenL per input, pinned by forcing EOS")
    generation: GenerationConfig = Field(default_factory=GenerationConfig)

    @property
    def size(self) -> int:
        return len(self.inputs)

    def digest(self) -> str:
        h = xxhash.xxh3_64()
        h.update(sequences_digest(self.inputs).encode())
        h.update(orjson.dumps(self.forced_lengths))
        h.update(orjson.dumps(self.generation.model_dump(mode="json")))
        return h.hexdigest()


class LatencyReport(BaseModel):
    batch_size: int
    runs_ms: List[float] = Field(description="Wall time of each timed run over the whole workload")
    mean_ms: float
    std_ms: float = Field(ge=0.0)
    encoder_share: float = Field(description="Mean fraction of run time spent encoding")
    decoder_share: float = Field(description="Mean fraction of run time spent in decoder steps")
    steps: int = Field(description="Decoder steps per run, summed over batches")
    n_batches: int
    workload_digest: str
    label: str = Field(default="")


class Measurement(BaseModel):
    """One cost-model data point."""

    l_enc: int
    l_dec: int
    steps: int
    batch_size: int
    mean_ms: float


class CostCoefficients(BaseModel):
    alpha: float = Field(description="Fixed overhead, ms")
    beta_enc: float = Field(description="ms per encoder layer")
    beta_dec: float = Field(description="ms per decoder layer per generation step")
    r2: float
    n_points: int


class CostModel(BaseModel):
    """Per batch size: mean_ms ~ alpha + beta_enc * l_enc + beta_dec * l_dec * steps."""

    by_batch: Dict[int, CostCoefficients] = Field(default_factory=dict)


class HoldoutError(BaseModel):
    batch_size: int
    l_enc: int
    l_dec: int
    predicted_speedup: float
    measured_speedup: float
    rel_error: float
