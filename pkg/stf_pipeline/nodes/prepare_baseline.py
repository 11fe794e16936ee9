"""Prepare baseline node - trains the unpruned model of one scale and scores it.

A baseline handed in through the state is only evaluated, never retrained.
"""

import logging
from pathlib import Path
from typing import Any, Dict

from seq2seq_model.checkpoint import save_checkpoint
from seq2seq_model.init import init_model
from stf_pipeline.evaluation import evaluate_model
from stf_pipeline.schemas import GridState
from stf_pipeline.training import train
from utils.errors import ConfigError
from utils.rng import derive_seed

logger = logging.getLogger(__name__)


def check_vocab(config, corpus) -> None:
    if config.vocab_size < len(corpus.vocab):
        raise ConfigError(
            f"model vocabulary {config.vocab_size} is smaller than the corpus vocabulary {len(corpus.vocab)}",
            field="vocab_size",
        )


def prepare_baseline_node(state: GridState) -> Dict[str, Any]:
    scale = state.scale
    check_vocab(scale.config, state.corpus)

    if state.baseline is None:
        logger.info(f"Training baseline {scale.tag} ({scale.config.n_enc_layers}+{scale.config.n_dec_layers} layers)")
        weights = init_model(scale.config, seed=derive_seed(state.hyper.seed, "init", scale.tag))
        result = train(weights, state.corpus, state.hyper, label=scale.tag)
        baseline, curve = result.weights, result.curve
    else:
        logger.info(f"Using supplied baseline for {scale.tag}")
        baseline, curve = state.baseline, state.baseline_curve

    scores = evaluate_model(baseline, state.corpus.test, state.corpus.vocab, state.evaluation)
    if state.output_dir and state.baseline is None:
        save_checkpoint(baseline, Path(state.output_dir) / "checkpoints" / f"{scale.tag}-baseline.ckpt")
    return {"baseline": baseline, "baseline_curve": curve, "baseline_scores": scores}
