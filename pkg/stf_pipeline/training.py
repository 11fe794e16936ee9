"""Teacher-forced training.

Each optimizer step accumulates gradients over micro-batches until the effective batch is
reached. Validation loss is checked after every epoch; training stops once it has failed
to improve `patience` times in a row and the best weights seen are restored.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from corpus.schemas import Corpus, Pair
from seq2seq_model.model import forward, pad_batch, shift_right
from seq2seq_model.schemas import BOS_ID, EOS_ID, PAD_ID, ModelWeights
from stf_pipeline.schemas import Hyperparams, TrainResult
from tensor_autodiff import ops
from tensor_autodiff.optim import OptimizerState, optimizer_step
from tensor_autodiff.tensor import Tape, Tensor, backward, no_grad
from utils.errors import EmptyCorpusError, NonFiniteError, OptimizerError, TrainingDivergedError
from utils.logging import log_kv
from utils.rng import derive_seed, make_rng
from utils.settings import settings

logger = logging.getLogger(__name__)

IGNORE_INDEX = -100


def _teacher_forced(weights: ModelWeights, pairs: Sequence[Pair]) -> Tuple[Tensor, np.ndarray]:
    src, mask = pad_batch([p.source for p in pairs], PAD_ID, weights.config.max_input_len)
    decoder_ids, targets = shift_right([p.summary for p in pairs], BOS_ID, EOS_ID, PAD_ID, IGNORE_INDEX)
    return forward(weights, src, mask, decoder_ids), targets


def batch_loss(weights: ModelWeights, pairs: Sequence[Pair]) -> Tensor:
    """Mean cross-entropy over every summary token and the closing EOS."""
    logits, targets = _teacher_forced(weights, pairs)
    return ops.cross_entropy(logits, targets, ignore_index=IGNORE_INDEX)


def _chunks(pairs: Sequence[Pair], size: int) -> List[Sequence[Pair]]:
    return [pairs[i:i + size] for i in range(0, len(pairs), size)]


def validation_loss(weights: ModelWeights, pairs: Sequence[Pair], batch_size: int = 16) -> float:
    """Token-weighted cross-entropy over `pairs`."""
    if not pairs:
        raise EmptyCorpusError("no validation pairs")
    total = 0.0
    count = 0
    with no_grad():
        for chunk in _chunks(pairs, batch_size):
            logits, targets = _teacher_forced(weights, chunk)
            live = int((targets != IGNORE_INDEX).sum())
            total += float(ops.cross_entropy(logits, targets, ignore_index=IGNORE_INDEX).data) * live
            count += live
    return total / count


def token_accuracy(weights: ModelWeights, pairs: Sequence[Pair], batch_size: int = 16) -> float:
    """Fraction of summary tokens (EOS included) predicted correctly under teacher forcing."""
    if not pairs:
        raise EmptyCorpusError("no pairs to score")
    hits = 0
    count = 0
    with no_grad():
        for chunk in _chunks(pairs, batch_size):
            logits, targets = _teacher_forced(weights, chunk)
            keep = targets != IGNORE_INDEX
            hits += int((logits.data.argmax(axis=-1) == targets)[keep].sum())
            count += int(keep.sum())
    return hits / count


def _accumulated_step(
    model: ModelWeights,
    chunk: Sequence[Pair],
    micro_batch: int,
    state: OptimizerState,
    step: int,
) -> float:
    params = model.tensors
    for tensor in params.values():
        tensor.grad = None
    parts = _chunks(chunk, micro_batch)
    total = 0.0
    try:
        for part in parts:
            with Tape() as tape:
                loss = ops.scale(batch_loss(model, part), 1.0 / len(parts))
            backward(tape, loss, params.values())
            total += float(loss.data)
        if not np.isfinite(total):
            raise TrainingDivergedError(f"loss is {total}", step=step)
        optimizer_step(params, None, state)
    except (NonFiniteError, OptimizerError) as exc:
        raise TrainingDivergedError(f"training diverged: {exc.message}", step=step) from exc
    return total


def train(weights: ModelWeights, corpus: Corpus, hyper: Hyperparams, *, label: str = "model") -> TrainResult:
    """Train a copy of `weights` on the training split; the input weights are never modified.

    The shuffle order depends only on `hyper.seed` and `label`, so reruns are bit-identical.
    """
    pairs = corpus.train
    if not pairs:
        raise EmptyCorpusError("training split is empty")
    valid = corpus.valid
    model = weights.trainable()
    state = OptimizerState.create(model.tensors, hyper.optimizer())
    rng = make_rng(derive_seed(hyper.seed, "train", label))

    steps_per_epoch = -(-len(pairs) // hyper.effective_batch)
    step_cap = steps_per_epoch * hyper.epochs
    if hyper.max_steps is not None:
        step_cap = min(step_cap, hyper.max_steps)

    curve: List[float] = []
    valid_losses: List[float] = []
    best_loss: Optional[float] = None
    best_arrays = None
    misses = 0
    steps = 0
    epochs_run = 0
    stopped_early = False

    logger.info(
        f"Training {label}: {len(pairs)} pairs, {hyper.accumulation_steps}x{hyper.micro_batch} per step, "
        f"up to {step_cap} steps"
    )
    progress = tqdm(total=step_cap, desc=f"train {label}", disable=not settings.progress, leave=False)
    try:
        for epoch in range(hyper.epochs):
            if steps >= step_cap:
                break
            order = rng.permutation(len(pairs))
            for start in range(0, len(order), hyper.effective_batch):
                if steps >= step_cap:
                    break
                chunk = [pairs[int(i)] for i in order[start:start + hyper.effective_batch]]
                curve.append(_accumulated_step(model, chunk, hyper.micro_batch, state, steps))
                steps += 1
                progress.update(1)
            epochs_run += 1

            if not valid:
                continue
            loss = validation_loss(model, valid, hyper.micro_batch)
            valid_losses.append(loss)
            log_kv(logger, logging.INFO, "epoch", label=label, epoch=epoch, steps=steps, train_loss=curve[-1], valid_loss=loss)
            if best_loss is None or loss < best_loss:
                best_loss = loss
                best_arrays = {name: t.data.copy() for name, t in model.tensors.items()}
                misses = 0
            else:
                misses += 1
                if misses >= hyper.patience:
                    stopped_early = True
                    logger.info(f"Stopping {label} after epoch {epoch}: no improvement for {misses} evaluations")
                    break
    finally:
        progress.close()

    if best_arrays is not None:
        for name, array in best_arrays.items():
            model.tensors[name].data = array

    return TrainResult(
        weights=model.frozen(),
        curve=curve,
        valid_losses=valid_losses,
        steps=steps,
        epochs_run=epochs_run,
        best_valid_loss=best_loss,
        stopped_early=stopped_early,
    )
