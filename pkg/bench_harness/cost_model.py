"""Linear latency model fitted separately per batch size.

    mean_ms ~ alpha + beta_enc * l_enc + beta_dec * l_dec * steps
"""

import logging
from collections import defaultdict
from typing import Dict, List, Sequence, Tuple

import numpy as np

from bench_harness.Config import COST_MODEL_CONFIG
from bench_harness.schemas import CostCoefficients, CostModel, HoldoutError, Measurement
from utils.errors import BenchmarkError, RankDeficientError

logger = logging.getLogger(__name__)

Shape = Tuple[int, int]


def _design(points: Sequence[Measurement]) -> Tuple[np.ndarray, np.ndarray]:
    X = np.array([[1.0, m.l_enc, m.l_dec * m.steps] for m in points], dtype=np.float64)
    y = np.array([m.mean_ms for m in points], dtype=np.float64)
    return X, y


def _fit_one(batch_size: int, points: Sequence[Measurement]) -> CostCoefficients:
    shapes = {(m.l_enc, m.l_dec) for m in points}
    if len(shapes) < COST_MODEL_CONFIG["min_points"]:
        raise BenchmarkError(
            f"batch size {batch_size}: {len(shapes)} distinct shapes, need {COST_MODEL_CONFIG['min_points']}"
        )
    X, y = _design(points)
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise RankDeficientError(f"batch size {batch_size}: design matrix has rank {np.linalg.matrix_rank(X)}")
    # Normal equations
    coef = np.linalg.solve(X.T @ X, X.T @ y)
    residual = y - X @ coef
    ss_res = float(residual @ residual)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return CostCoefficients(alpha=coef[0], beta_enc=coef[1], beta_dec=coef[2], r2=r2, n_points=len(points))


def _by_batch(measurements: Sequence[Measurement]) -> Dict[int, List[Measurement]]:
    groups: Dict[int, List[Measurement]] = defaultdict(list)
    for m in measurements:
        groups[m.batch_size].append(m)
    return dict(groups)


def fit_cost_model(measurements: Sequence[Measurement]) -> CostModel:
    if not measurements:
        raise BenchmarkError("no measurements to fit")
    model = CostModel(by_batch={bs: _fit_one(bs, pts) for bs, pts in sorted(_by_batch(measurements).items())})
    for bs, c in model.by_batch.items():
        logger.info(
            f"Cost model bs={bs}: alpha={c.alpha:.3f} beta_enc={c.beta_enc:.4f} "
            f"beta_dec={c.beta_dec:.5f} R2={c.r2:.4f} ({c.n_points} points)"
        )
    return model


def predict_latency(model: CostModel, batch_size: int, l_enc: int, l_dec: int, steps: int) -> float:
    c = model.by_batch.get(batch_size)
    if c is None:
        raise BenchmarkError(f"cost model has no fit for batch size {batch_size}")
    return c.alpha + c.beta_enc * l_enc + c.beta_dec * l_dec * steps


def predict_speedup(model: CostModel, baseline: Shape, candidate: Shape, steps: int, batch_size: int = 1) -> float:
    return predict_latency(model, batch_size, *baseline, steps) / predict_latency(model, batch_size, *candidate, steps)


def residual_correlations(model: CostModel, measurements: Sequence[Measurement]) -> Dict[str, float]:
    """Pearson correlation of fit residuals with l_enc and with l_dec, over all points."""
    residuals = np.array([
        m.mean_ms - predict_latency(model, m.batch_size, m.l_enc, m.l_dec, m.steps) for m in measurements
    ])
    out = {}
    for key in ("l_enc", "l_dec"):
        values = np.array([getattr(m, key) for m in measurements], dtype=np.float64)
        if residuals.std() == 0 or values.std() == 0:
            out[key] = 0.0
        else:
            out[key] = float(np.corrcoef(residuals, values)[0, 1])
    return out


def holdout_speedup_errors(measurements: Sequence[Measurement]) -> List[HoldoutError]:
    """Leave one pruned shape out, refit, and compare its predicted speedup over the
    unpruned shape with the measured one."""
    errors = []
    for bs, points in sorted(_by_batch(measurements).items()):
        baseline = max(points, key=lambda m: (m.l_enc + m.l_dec, m.l_enc))
        for held in points:
            if (held.l_enc, held.l_dec) == (baseline.l_enc, baseline.l_dec):
                continue
            rest = [m for m in points if (m.l_enc, m.l_dec) != (held.l_enc, held.l_dec)]
            model = CostModel(by_batch={bs: _fit_one(bs, rest)})
            predicted = (
                predict_latency(model, bs, baseline.l_enc, baseline.l_dec, baseline.steps)
                / predict_latency(model, bs, held.l_enc, held.l_dec, held.steps)
            )
            measured = baseline.mean_ms / held.mean_ms
            errors.append(HoldoutError(
                batch_size=bs, l_enc=held.l_enc, l_dec=held.l_dec,
                predicted_speedup=predicted, measured_speedup=measured,
                rel_error=abs(predicted - measured) / measured,
            ))
    return errors
