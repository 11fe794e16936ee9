from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


def format_score(value: float) -> str:
    return f"{value:.4f}"


class PRF(BaseModel):
    model_config = ConfigDict(frozen=True)

    precision: float = Field(default=0.0, ge=0.0, le=1.0)
    recall: float = Field(default=0.0, ge=0.0, le=1.0)
    f1: float = Field(default=0.0, ge=0.0, le=1.0)

    @classmethod
    def from_counts(cls, overlap: float, candidate_total: float, reference_total: float) -> "PRF":
        precision = overlap / candidate_total if candidate_total > 0 else 0.0
        recall = overlap / reference_total if reference_total > 0 else 0.0
        return cls.from_pr(precision, recall)

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "PRF":
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        return cls(precision=precision, recall=recall, f1=f1)


class RougeScores(BaseModel):
    """Corpus-level ROUGE (mean of per-pair scores) and mean generation length."""

    r1: PRF = Field(default_factory=PRF)
    r2: PRF = Field(default_factory=PRF)
    rl: PRF = Field(default_factory=PRF, description="Sentence-level LCS")
    rlsum: PRF = Field(default_factory=PRF, description="Summary-level union LCS")
    genl: float = Field(default=0.0, description="Mean generated tokens per summary, EOS included")

    def f1_row(self) -> Dict[str, str]:
        return {
            "r1": format_score(self.r1.f1),
            "r2": format_score(self.r2.f1),
            "rl": format_score(self.rl.f1),
            "rlsum": format_score(self.rlsum.f1),
            "genl": f"{self.genl:.2f}",
        }


class Comparison(BaseModel):
    """A candidate against the uncompressed baseline: recall R, impact and speedup."""

    recall_pct: Optional[float] = Field(default=None, description="100 * score / baseline; None when the baseline scores zero")
    impact_pct: Optional[float] = Field(default=None, description="100 * (score / baseline - 1); None when the baseline scores zero")
    speedup: Optional[float] = Field(default=None, description="baseline latency / candidate latency")
