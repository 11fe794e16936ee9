from enum import Enum
from typing import Any, Dict, List, Literal, Mapping

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from tensor_autodiff.tensor import Tensor
from utils.digest import array_digest, mapping_digest
from utils.errors import ConfigError

PAD_ID = 0
EOS_ID = 1
BOS_ID = 2
UNK_ID = 3
NUM_SPECIAL = 4


class StackPart(str, Enum):
    ENCODER = "Encoder"
    DECODER = "Decoder"
    EMBEDDING = "Embedding"
    HEAD = "Head"


class ModelConfig(BaseModel):
    """Architecture of a T5-style encoder-decoder with independent stack depths."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    d_model: int = Field(description="Residual stream width")
    n_heads: int = Field(description="Attention heads per block")
    d_kv: int = Field(description="Per-head key/value width; n_heads*d_kv need not equal d_model")
    d_ff: int = Field(description="Feed-forward inner width")
    n_enc_layers: int = Field(description="Encoder depth")
    n_dec_layers: int = Field(description="Decoder depth")
    vocab_size: int = Field(description="Token vocabulary including pad/eos/bos/unk")
    rel_pos_buckets: int = Field(default=32, description="Relative position bias buckets per stack")
    rel_pos_max_distance: int = Field(default=128, description="Distance beyond which buckets saturate")
    tie_embeddings: bool = Field(default=True, description="Reuse the shared embedding as LM head")
    ff_activation: Literal["relu", "gated-gelu"] = Field(default="relu", description="Feed-forward nonlinearity")
    max_input_len: int = Field(default=1024, description="Longest accepted source sequence")
    norm_eps: float = Field(default=1e-6, description="RMS norm epsilon")

    @model_validator(mode="after")
    def _check_ranges(self) -> "ModelConfig":
        positive = ("d_model", "n_heads", "d_kv", "d_ff", "n_enc_layers", "n_dec_layers", "max_input_len")
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"must be >= 1, got {getattr(self, name)}", field=name)
        if self.vocab_size < NUM_SPECIAL:
            raise ConfigError(f"must be >= {NUM_SPECIAL} (pad, eos, bos, >=1 symbol), got {self.vocab_size}", field="vocab_size")
        if self.rel_pos_buckets < 2:
            raise ConfigError(f"must be >= 2, got {self.rel_pos_buckets}", field="rel_pos_buckets")
        if self.rel_pos_max_distance < 1:
            raise ConfigError(f"must be >= 1, got {self.rel_pos_max_distance}", field="rel_pos_max_distance")
        if self.norm_eps < 0:
            raise ConfigError(f"must be >= 0, got {self.norm_eps}", field="norm_eps")
        return self

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "ModelConfig":
        """Build from untrusted input, reporting the first bad field as a ConfigError."""
        try:
            return cls(**dict(values))
        except ValidationError as e:
            first = e.errors()[0]
            field = ".".join(str(part) for part in first.get("loc", ())) or None
            raise ConfigError(first.get("msg", "invalid value"), field=field) from e

    @property
    def inner_dim(self) -> int:
        return self.n_heads * self.d_kv

    @property
    def gated(self) -> bool:
        return self.ff_activation == "gated-gelu"


class ModelWeights(BaseModel):
    """Named tensors of one model; names follow `seq2seq_model.layout.param_shapes`."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: ModelConfig
    tensors: Dict[str, Tensor] = Field(description="Canonical name -> tensor")

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def names(self) -> List[str]:
        return list(self.tensors)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: t.data for name, t in self.tensors.items()}

    def total_params(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def copy(self, requires_grad: bool = False) -> "ModelWeights":
        tensors = {name: Tensor(t.data.copy(), requires_grad=requires_grad, name=name) for name, t in self.tensors.items()}
        return ModelWeights(config=self.config, tensors=tensors)

    def trainable(self) -> "ModelWeights":
        return self.copy(requires_grad=True)

    def frozen(self) -> "ModelWeights":
        return self.copy(requires_grad=False)

    def digest(self) -> str:
        return mapping_digest(self.arrays())

    def tensor_digests(self, prefix: str = "") -> Dict[str, str]:
        return {name: array_digest(t.data) for name, t in self.tensors.items() if name.startswith(prefix)}
