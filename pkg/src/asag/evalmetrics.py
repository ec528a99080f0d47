"""Regression metrics for grading quality: Pearson correlation, RMSE, MAE, R².

All metrics use population (1/N) normalization throughout, so the
correlation is independent of the normalization convention. Zero-variance
inputs raise instead of silently returning 0: skewed corpora where a
question's answers all share one score make that case reachable, and it
must be loud.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import UndefinedMetricError

__all__ = ["EvalResult", "pearson", "rmse", "mae", "r_squared", "evaluate"]


@dataclass(frozen=True)
class EvalResult:
    pearson: float
    rmse: float
    mae: float
    r_squared: float
    n: int


def _check_lengths(x: Sequence[float], y: Sequence[float], minimum: int) -> int:
    if len(x) != len(y):
        raise UndefinedMetricError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < minimum:
        raise UndefinedMetricError(f"need at least {minimum} points, got {len(x)}")
    return len(x)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation via the two-pass mean-centered formulation."""
    n = _check_lengths(x, y, 2)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    xc = [v - mx for v in x]
    yc = [v - my for v in y]
    sxx = math.fsum(v * v for v in xc)
    syy = math.fsum(v * v for v in yc)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedMetricError("correlation undefined: zero variance input")
    sxy = math.fsum(a * b for a, b in zip(xc, yc))
    return sxy / math.sqrt(sxx * syy)


def rmse(actual: Sequence[float], predicted: Sequence[float]) -> float:
    n = _check_lengths(actual, predicted, 1)
    return math.sqrt(math.fsum((a - p) ** 2 for a, p in zip(actual, predicted)) / n)


def mae(actual: Sequence[float], predicted: Sequence[float]) -> float:
    n = _check_lengths(actual, predicted, 1)
    return math.fsum(abs(a - p) for a, p in zip(actual, predicted)) / n


def r_squared(actual: Sequence[float], predicted: Sequence[float]) -> float:
    n = _check_lengths(actual, predicted, 2)
    mean_actual = math.fsum(actual) / n
    ss_tot = math.fsum((a - mean_actual) ** 2 for a in actual)
    if ss_tot == 0.0:
        raise UndefinedMetricError("R² undefined: zero variance in targets")
    ss_res = math.fsum((a - p) ** 2 for a, p in zip(actual, predicted))
    return 1.0 - ss_res / ss_tot


def evaluate(pairs_with_gold, predictions: Mapping[str, float], score_max: float) -> EvalResult:
    """Score predictions against gold scores, aligned by pair id.

    `predictions` maps pair id to a predicted score on the original
    (descaled) scale; gold scores come from the pairs themselves.
    """
    gold: list[float] = []
    pred: list[float] = []
    for pair in pairs_with_gold:
        if pair.gold_score is None:
            raise UndefinedMetricError(f"pair {pair.id!r} has no gold score")
        if pair.id not in predictions:
            raise UndefinedMetricError(f"no prediction for pair {pair.id!r}")
        if not 0.0 <= pair.gold_score <= score_max:
            raise UndefinedMetricError(
                f"gold score {pair.gold_score} outside [0, {score_max}] for pair {pair.id!r}"
            )
        gold.append(pair.gold_score)
        pred.append(predictions[pair.id])
    if len(predictions) != len(gold):
        extra = set(predictions) - {p.id for p in pairs_with_gold}
        raise UndefinedMetricError(f"predictions for unknown ids: {sorted(extra)[:5]}")
    return EvalResult(
        pearson=pearson(gold, pred),
        rmse=rmse(gold, pred),
        mae=mae(gold, pred),
        r_squared=r_squared(gold, pred),
        n=len(gold),
    )
