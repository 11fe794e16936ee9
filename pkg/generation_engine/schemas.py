from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from seq2seq_model.schemas import BOS_ID, EOS_ID, PAD_ID
from utils.errors import ConfigError


class GenerationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_input_len: int = Field(default=1024, description="Longer sources are truncated to this many tokens, with a warning")
    max_new_tokens: int = Field(default=256, description="Decoder step cap per batch")
    eos_id: int = Field(default=EOS_ID)
    pad_id: int = Field(default=PAD_ID)
    bos_id: int = Field(default=BOS_ID, description="Decoder start token")
    decode_mode: Literal["Greedy"] = Field(default="Greedy")

    @model_validator(mode="after")
    def _check(self) -> "GenerationConfig":
        if self.max_new_tokens < 1:
            raise ConfigError(f"must be >= 1, got {self.max_new_tokens}", field="max_new_tokens")
        if self.max_input_len < 1:
            raise ConfigError(f"must be >= 1, got {self.max_input_len}", field="max_input_len")
        if self.eos_id == self.pad_id:
            raise ConfigError("eos_id and pad_id must differ", field="eos_id")
        return self


class GenerationTrace(BaseModel):
    """Timings of one batch: a single encoder pass and one entry per decoder step."""

    encoder_time: float = Field(description="Seconds spent padding and encoding the batch")
    decoder_times: List[float] = Field(default_factory=list, description="Seconds per decoder step")
    genl: List[int] = Field(default_factory=list, description="Tokens emitted per sequence up to and including EOS")

    @property
    def steps(self) -> int:
        return len(self.decoder_times)

    @property
    def decoder_time(self) -> float:
        return float(sum(self.decoder_times))

    def to_record(self) -> Dict[str, object]:
        """Microsecond timings for the results store."""
        return {
            "encoder_us": round(self.encoder_time * 1e6, 3),
            "decoder_us": [round(t * 1e6, 3) for t in self.decoder_times],
            "genl": list(self.genl),
        }


class GenerationResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    sequences: List[List[int]] = Field(description="Per sequence, one token per executed step (pad after EOS)")
    trace: GenerationTrace
    step_logits: Optional[List[np.ndarray]] = Field(default=None, description="batch x vocab logits per step, when captured")

    def summaries(self, eos_id: int = EOS_ID, pad_id: int = PAD_ID) -> List[List[int]]:
        from generation_engine.engine import strip_generated

        return [strip_generated(seq, eos_id, pad_id) for seq in self.sequences]
