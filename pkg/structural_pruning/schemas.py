from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class RetentionStrategy(str, Enum):
    EVENLY_SPACED = "EvenlySpaced"
    FIRST_K = "FirstK"
    LAST_K = "LastK"


class PruneSpec(BaseModel):
    """How many encoder (l_enc) and decoder (l_dec) layers survive, and which ones."""

    model_config = ConfigDict(frozen=True)

    enc_keep: int = Field(description="Encoder layers retained (l_enc)")
    dec_keep: int = Field(description="Decoder layers retained (l_dec)")
    strategy: RetentionStrategy = Field(default=RetentionStrategy.EVENLY_SPACED, description="Which layers are retained")

    @property
    def shape(self) -> tuple:
        return (self.enc_keep, self.dec_keep)

    def label(self) -> str:
        return f"e{self.enc_keep}-d{self.dec_keep}"
