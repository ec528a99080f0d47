"""Training the regression head under the restart-and-early-stop controller.

Builds a synthetic learnable corpus (targets are a noisy linear
functional of the hash embedder's pair vectors), then runs the
controller: stratified 90/10 re-splits per attempt, batch-size-1 epochs
of decoupled-weight-decay adaptive updates under a linear
warmup-and-decay schedule, abort when scaled validation RMSE exceeds
0.15 after six epochs, acceptance at validation correlation >= 0.75,
and early stopping at the minimum-validation-loss epoch.
"""

import numpy as np

from asag import (
    AnswerPair,
    Corpus,
    HashProvider,
    HeadConfig,
    SplitSpec,
    TrainConfig,
    fit_with_controller,
    predict_score,
)
from asag._rng import SplitMix64

DIM, N_PAIRS, N_QUESTIONS = 64, 500, 20

provider = HashProvider(DIM)
w_rng = SplitMix64(123)
w = np.array([2.0 * w_rng.next_unit() - 1.0 for _ in range(DIM)])
w /= np.linalg.norm(w)

rows = []
for q in range(N_QUESTIONS):
    reference = f"reference explanation of concept {q} uses marker words alpha{q} beta{q}"
    for s in range(N_PAIRS // N_QUESTIONS):
        student = f"student answer {s} describing concept {q} with token gamma{q}x{s}"
        rows.append((f"p{len(rows):04d}", f"q{q:02d}", reference, student))

raws = np.array([provider.embed_pair(r, s) @ w for (_, _, r, s) in rows])
z = (raws - raws.mean()) / raws.std()
units = np.clip(0.5 + 0.225 * np.clip(z, -2, 2) + np.random.default_rng(0).normal(0, 0.02, len(z)), 0, 1)
corpus = Corpus(
    pairs=tuple(
        AnswerPair(id=i, question_id=q, question_text=f"question {q}", reference_answer=r,
                   student_answer=s, gold_score=float(u) * 5.0)
        for (i, q, r, s), u in zip(rows, units)
    ),
    score_max=5.0,
)

report, model = fit_with_controller(
    corpus,
    provider,
    HeadConfig(input_dim=DIM, hidden_dims=(64,), dropout_p=0.1, seed=42),
    TrainConfig(lr_peak=3e-3, max_epochs=12, base_seed=40, max_restarts=3),
    SplitSpec(fractions=(0.9, 0.1), seed=40),
)

print(f"accepted: {report.accepted} (attempt {report.chosen_attempt}, epoch {report.chosen_epoch})")
print("\nlearning curve (attempt 1):")
print(f"{'epoch':>5} {'train loss':>12} {'val loss':>10} {'val rmse':>9} {'val pearson':>12}")
for rec in report.attempts[0].epochs:
    marker = "  <- early stop" if rec.epoch == report.chosen_epoch else ""
    print(
        f"{rec.epoch:>5} {rec.train_loss:>12.5f} {rec.val_loss:>10.5f} "
        f"{rec.val_rmse_scaled:>9.4f} {rec.val_pearson:>12.4f}{marker}"
    )

pair = corpus.pairs[0]
x = provider.embed_pair(pair.reference_answer, pair.student_answer)
print(f"\nsample prediction: gold {pair.gold_score:.3f}, predicted {predict_score(model, x, 5.0):.3f}")
