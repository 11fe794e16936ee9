"""Refit variant node - prunes the baseline to one spec and re-fine-tunes it.

Runs once per dispatched spec, possibly concurrently with other variants.
"""

import logging
from typing import Dict, List

from stf_pipeline.evaluation import evaluate_model
from stf_pipeline.schemas import VariantOutcome
from stf_pipeline.training import train
from structural_pruning.pruning import prune

logger = logging.getLogger(__name__)


def refit_variant_node(inputs: Dict) -> Dict[str, List[VariantOutcome]]:
    spec = inputs["spec"]
    corpus = inputs["corpus"]
    label = f"{inputs['tag']}-{spec.label()}"

    weights = prune(inputs["baseline"], spec)
    curve: List[float] = []
    if inputs["finetune"]:
        result = train(weights, corpus, inputs["hyper"], label=label)
        weights, curve = result.weights, result.curve
        logger.info(f"Re-fine-tuned {label} for {result.steps} steps")

    scores = evaluate_model(weights, corpus.test, corpus.vocab, inputs["evaluation"])
    outcome = VariantOutcome(
        index=inputs["index"], spec=spec, weights=weights, scores=scores, curve=curve, finetuned=inputs["finetune"],
    )
    return {"variants": [outcome]}
