"""The optimization loop and the restart-with-new-split controller.

One training attempt runs batch-size-1 epochs of decoupled-weight-decay
adaptive-moment updates under a linear warmup/decay schedule, validates
after each epoch, snapshots parameters whenever validation loss reaches
a new minimum (early stopping), and aborts after the sixth epoch when
the scaled validation RMSE is still above 0.15. The controller re-splits
train/validation with a fresh seed per attempt until an attempt's best
epoch clears the validation-correlation bar (0.75), falling back to the
best attempt seen when the restart budget runs out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ._rng import SplitMix64
from .corpus import Corpus, scale_score
from .errors import ControllerError, NumericError, UndefinedMetricError
from .evalmetrics import pearson, rmse
from .model import HeadConfig, HeadModel, head_backward, head_forward, huber_loss, init_head
from .splitter import SplitSpec, stratified_split

__all__ = [
    "TrainConfig",
    "EpochRecord",
    "AttemptRecord",
    "TrainReport",
    "lr_at",
    "AdamWState",
    "optimizer_step",
    "train_attempt",
    "fit_with_controller",
]


@dataclass(frozen=True)
class TrainConfig:
    lr_peak: float = 1e-5
    weight_decay: float = 0.1
    warmup_proportion: float = 0.06
    max_epochs: int = 12
    batch_size: int = 1  # informational: the loop always steps per sample
    huber_delta: float = 1.0
    abort_epoch: int = 6
    abort_rmse_scaled: float = 0.15
    accept_val_pearson: float = 0.75
    max_restarts: int = 10
    base_seed: int = 40

    def __post_init__(self):
        if not 0.0 < self.warmup_proportion < 1.0:
            raise NumericError(f"warmup_proportion must lie in (0, 1), got {self.warmup_proportion}")
        if self.abort_epoch > self.max_epochs:
            raise NumericError(
                f"abort_epoch {self.abort_epoch} exceeds max_epochs {self.max_epochs}"
            )
        if not 0.0 < self.abort_rmse_scaled < 1.0:
            raise NumericError(f"abort_rmse_scaled must lie in (0, 1), got {self.abort_rmse_scaled}")
        if not 0.0 < self.accept_val_pearson < 1.0:
            raise NumericError(f"accept_val_pearson must lie in (0, 1), got {self.accept_val_pearson}")
        if self.lr_peak <= 0 or self.huber_delta <= 0 or self.max_epochs < 1 or self.max_restarts < 1:
            raise NumericError("lr_peak, huber_delta, max_epochs, max_restarts must be positive")


@dataclass(frozen=True)
class EpochRecord:
    attempt: int
    epoch: int
    train_loss: float
    val_loss: float
    val_rmse_scaled: float
    val_pearson: float


@dataclass
class AttemptRecord:
    attempt: int
    seed: int
    epochs: list[EpochRecord] = field(default_factory=list)
    aborted: bool = False
    failed: bool = False
    best_epoch: int = 0
    best_val_loss: float = math.inf

    @property
    def best_record(self) -> EpochRecord | None:
        for record in self.epochs:
            if record.epoch == self.best_epoch:
                return record
        return None


@dataclass
class TrainReport:
    attempts: list[AttemptRecord]
    chosen_attempt: int
    chosen_epoch: int
    accepted: bool
    final_val_loss: float
    final_val_rmse_scaled: float
    final_val_pearson: float


def lr_at(step: int, total_steps: int, config: TrainConfig) -> float:
    """Linear ramp 0→peak over the warmup steps, then linear decay to 0."""
    if not 1 <= step <= total_steps:
        raise NumericError(f"step {step} outside 1..{total_steps}")
    if total_steps == 1:
        return config.lr_peak
    warmup_steps = math.ceil(config.warmup_proportion * total_steps)
    warmup_steps = min(warmup_steps, total_steps - 1)
    if step <= warmup_steps:
        return config.lr_peak * step / warmup_steps
    return config.lr_peak * (total_steps - step) / (total_steps - warmup_steps)


class AdamWState:
    """First/second moment accumulators and the shared step counter."""

    def __init__(self, params: Sequence[np.ndarray]):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.step = 0


_BETA1 = 0.9
_BETA2 = 0.999
_EPS = 1e-8


def optimizer_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamWState,
    lr_t: float,
    config: TrainConfig,
) -> None:
    """Adaptive-moment update with bias correction and decoupled decay.

    θ ← θ − lr_t · (m̂/(√v̂+ε) + λθ); mutates params and state in place.
    """
    for g in grads:
        if not np.isfinite(g).all():
            raise NumericError("non-finite gradient")
    state.step += 1
    t = state.step
    bias1 = 1.0 - _BETA1**t
    bias2 = 1.0 - _BETA2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= _BETA1
        m += (1.0 - _BETA1) * g
        v *= _BETA2
        v += (1.0 - _BETA2) * (g * g)
        m_hat = m / bias1
        v_hat = v / bias2
        p -= lr_t * (m_hat / (np.sqrt(v_hat) + _EPS) + config.weight_decay * p)


def _validate(
    model: HeadModel, val_X: np.ndarray, val_y: np.ndarray, delta: float
) -> tuple[float, float, float]:
    """Mean Huber loss on raw predictions; RMSE/Pearson on clipped ones."""
    losses = []
    clipped = []
    for x, y in zip(val_X, val_y):
        yhat, _ = head_forward(model, x, train_mode=False)
        loss, _ = huber_loss(y, yhat, delta)
        losses.append(loss)
        clipped.append(min(1.0, max(0.0, yhat)))
    val_loss = float(np.mean(losses))
    val_rmse = rmse(list(val_y), clipped)
    try:
        val_pearson = pearson(list(val_y), clipped)
    except UndefinedMetricError:
        val_pearson = math.nan  # degenerate predictions or targets; never accepted
    return val_loss, val_rmse, val_pearson


def train_attempt(
    train_X,
    train_y,
    val_X,
    val_y,
    head_config: HeadConfig,
    train_config: TrainConfig,
    seed: int,
    attempt: int = 1,
    curve_sink: Callable[[EpochRecord], None] | None = None,
) -> tuple[AttemptRecord, HeadModel]:
    """One restartable training attempt; returns its record and the
    early-stopped model (parameters from the minimum-validation-loss epoch).
    """
    train_X = np.asarray(train_X, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.float64)
    val_X = np.asarray(val_X, dtype=np.float64)
    val_y = np.asarray(val_y, dtype=np.float64)
    n = train_X.shape[0]
    if n == 0 or val_X.shape[0] == 0:
        raise NumericError("empty train or validation set")

    model = init_head(head_config)
    state = AdamWState(model.parameters())
    shuffle_rng = SplitMix64(seed)
    total_steps = train_config.max_epochs * n
    record = AttemptRecord(attempt=attempt, seed=seed)
    best_params = model.copy_parameters()
    global_step = 0

    for epoch in range(1, train_config.max_epochs + 1):
        order = list(range(n))
        shuffle_rng.shuffle(order)
        epoch_losses = []
        for idx in order:
            global_step += 1
            lr_t = lr_at(global_step, total_steps, train_config)
            yhat, cache = head_forward(model, train_X[idx], train_mode=True)
            loss, dloss = huber_loss(train_y[idx], yhat, train_config.huber_delta)
            if not math.isfinite(loss):
                raise NumericError(f"non-finite training loss at step {global_step}")
            epoch_losses.append(loss)
            grads = head_backward(model, cache, dloss)
            optimizer_step(model.parameters(), grads, state, lr_t, train_config)
        train_loss = float(np.mean(epoch_losses))

        val_loss, val_rmse, val_pearson = _validate(model, val_X, val_y, train_config.huber_delta)
        if not math.isfinite(val_loss):
            raise NumericError(f"non-finite validation loss at epoch {epoch}")
        epoch_record = EpochRecord(
            attempt=attempt,
            epoch=epoch,
            train_loss=train_loss,
            val_loss=val_loss,
            val_rmse_scaled=val_rmse,
            val_pearson=val_pearson,
        )
        record.epochs.append(epoch_record)
        if curve_sink is not None:
            curve_sink(epoch_record)

        if val_loss < record.best_val_loss:
            record.best_val_loss = val_loss
            record.best_epoch = epoch
            best_params = model.copy_parameters()

        if epoch == train_config.abort_epoch and val_rmse > train_config.abort_rmse_scaled:
            record.aborted = True
            break

    best_model = init_head(head_config)
    best_model.load_parameters(best_params)
    return record, best_model


def _pair_features(corpus: Corpus, provider) -> tuple[np.ndarray, np.ndarray]:
    """Pooled pair vectors and scaled targets for every pair in order."""
    X = np.empty((len(corpus), provider.dim), dtype=np.float64)
    y = np.empty(len(corpus), dtype=np.float64)
    for i, pair in enumerate(corpus):
        if pair.gold_score is None:
            raise NumericError(f"pair {pair.id!r} has no gold score; cannot train on it")
        X[i] = provider.embed_pair(pair.reference_answer, pair.student_answer)
        y[i] = scale_score(pair.gold_score, corpus.score_max)
    return X, y


def fit_with_controller(
    corpus: Corpus,
    provider,
    head_config: HeadConfig,
    train_config: TrainConfig,
    split_spec: SplitSpec,
    run_attempt: Callable[..., tuple[AttemptRecord, HeadModel]] = train_attempt,
    curve_sink: Callable[[EpochRecord], None] | None = None,
) -> tuple[TrainReport, HeadModel]:
    """Restart loop: re-split with a fresh seed until an attempt's best
    epoch reaches the validation-correlation bar.

    Attempt a splits with seed base_seed + a. A non-accepted run restarts
    (abort rule or correlation below the bar); after max_restarts the
    best attempt by validation correlation is returned flagged
    not-accepted. Attempts that fail numerically are recorded and skipped.
    """
    attempts: list[AttemptRecord] = []
    candidates: list[tuple[AttemptRecord, HeadModel]] = []
    for attempt_index in range(1, train_config.max_restarts + 1):
        seed = train_config.base_seed + attempt_index
        parts = stratified_split(corpus, replace(split_spec, seed=seed))
        train_part, val_part = parts[0], parts[1]
        train_X, train_y = _pair_features(train_part, provider)
        val_X, val_y = _pair_features(val_part, provider)
        try:
            record, attempt_model = run_attempt(
                train_X,
                train_y,
                val_X,
                val_y,
                head_config,
                train_config,
                seed,
                attempt=attempt_index,
                curve_sink=curve_sink,
            )
        except NumericError:
            failed = AttemptRecord(attempt=attempt_index, seed=seed, failed=True)
            attempts.append(failed)
            continue
        attempts.append(record)
        candidates.append((record, attempt_model))
        best = record.best_record
        if best is not None and not math.isnan(best.val_pearson):
            if best.val_pearson >= train_config.accept_val_pearson:
                return _build_report(attempts, record, accepted=True), attempt_model

    if not candidates:
        raise ControllerError("all training attempts failed numerically")

    def sort_key(item: tuple[AttemptRecord, HeadModel]) -> float:
        best = item[0].best_record
        if best is None or math.isnan(best.val_pearson):
            return -math.inf
        return best.val_pearson

    fallback_record, fallback_model = max(candidates, key=sort_key)
    return _build_report(attempts, fallback_record, accepted=False), fallback_model


def _build_report(attempts: list[AttemptRecord], chosen: AttemptRecord, accepted: bool) -> TrainReport:
    best = chosen.best_record
    return TrainReport(
        attempts=attempts,
        chosen_attempt=chosen.attempt,
        chosen_epoch=chosen.best_epoch,
        accepted=accepted,
        final_val_loss=chosen.best_val_loss,
        final_val_rmse_scaled=best.val_rmse_scaled if best else math.nan,
        final_val_pearson=best.val_pearson if best else math.nan,
    )
