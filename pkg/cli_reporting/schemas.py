from enum import Enum
from pathlib import Path
from typing import Dict, Optional

from pydantic import BaseModel, Field


class Command(str, Enum):
    TRAIN = "train"
    PRUNE = "prune"
    FINETUNE = "finetune"
    GENERATE = "generate"
    EVALUATE = "evaluate"
    BENCHMARK = "benchmark"
    GRID = "grid"
    SWEEP = "sweep"
    REPORT = "report"


class ReportBundle(BaseModel):
    """Files written for one run directory; every value in them comes from a stored record."""

    report_csv: Path
    tables_md: Path
    curves: Dict[str, Path] = Field(default_factory=dict, description="Curve name -> CSV file")
    n_records: int = Field(default=0)
    sweep: Optional[Path] = Field(default=None, description="Scale sweep summary, when the run has one")
