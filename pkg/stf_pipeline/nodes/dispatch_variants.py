"""Dispatch variants node - fans the pruning grid out for parallel re-fine-tuning.

Each spec becomes its own refit task; with nothing to prune the graph goes straight to benchmarking.
"""

import logging
from typing import List

from langgraph.types import Send

from stf_pipeline.schemas import GridState

logger = logging.getLogger(__name__)


def dispatch_variants(state: GridState) -> List[Send] | str:
    if not state.specs:
        logger.info(f"No variants requested for {state.scale.tag}")
        return "benchmark_variants"

    logger.info(f"Dispatching {len(state.specs)} variants of {state.scale.tag}")
    return [
        Send(
            "refit_variant",
            {
                "index": index,
                "spec": spec,
                "tag": state.scale.tag,
                "baseline": state.baseline,
                "corpus": state.corpus,
                "hyper": state.finetune.resolve(state.hyper),
                "finetune": state.finetune.enabled,
                "evaluation": state.evaluation,
            },
        )
        for index, spec in enumerate(state.specs)
    ]
