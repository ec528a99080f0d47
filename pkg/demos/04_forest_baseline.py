"""The feature-pipeline baseline: similarity features into bagged trees.

Extracts the 26-column combined feature matrix (counts, fuzzy ratios,
vector similarities) and fits the from-scratch bagged-tree regressor,
then reports the usual metric table on a held-out part.
"""

import numpy as np

from asag import (
    AnswerPair,
    Corpus,
    ForestConfig,
    HashProvider,
    SplitSpec,
    evaluate,
    feature_matrix,
    forest_fit,
    forest_predict,
    scaled_targets,
    stratified_split,
)

rng = np.random.default_rng(7)
vocab = ["stack", "queue", "tree", "node", "pointer", "array", "loop", "heap", "sort", "graph"]

rows = []
for q in range(12):
    reference = " ".join(rng.choice(vocab, size=6))
    for s in range(25):
        # higher overlap with the reference -> higher grade
        overlap = int(rng.integers(0, 7))
        kept = reference.split()[:overlap]
        noise = list(rng.choice(vocab, size=6 - overlap))
        student = " ".join(kept + noise)
        grade = round(5.0 * overlap / 6 + float(rng.normal(0, 0.3)), 2)
        rows.append((f"q{q}s{s}", f"q{q}", reference, student, min(5.0, max(0.0, grade))))

corpus = Corpus(
    pairs=tuple(
        AnswerPair(id=i, question_id=q, question_text="", reference_answer=r,
                   student_answer=s, gold_score=g)
        for i, q, r, s, g in rows
    ),
    score_max=5.0,
)

train, test = stratified_split(corpus, SplitSpec(fractions=(0.8, 0.2), seed=40))
provider = HashProvider(128)

X_train = feature_matrix(train, "all", provider)
y_train = scaled_targets(train)
forest = forest_fit(X_train, y_train, ForestConfig(n_trees=100, seed=40))

X_test = feature_matrix(test, "all", provider)
predictions = {
    pair.id: min(1.0, max(0.0, forest_predict(forest, x))) * corpus.score_max
    for pair, x in zip(test, X_test)
}
result = evaluate(test.pairs, predictions, corpus.score_max)

print(f"features: {X_train.shape[1]} columns, train {len(train)} / test {len(test)} pairs\n")
print(f"{'Metric':<28}Result")
print(f"{'Mean Absolute Error':<28}{result.mae:.2f}")
print(f"{'Root Mean Squared Error:':<28}{result.rmse:.2f}")
print(f"{'R-Squared:':<28}{result.r_squared:.2f}")
print(f"{'Correlation:':<28}{result.pearson:.2f}")
