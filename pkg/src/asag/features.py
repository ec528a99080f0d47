"""Feature-matrix assembly: named feature sets over a corpus.

Four sets are available: ``handcrafted`` (10 count/boundary features),
``fuzzy`` (4 ratios), ``vecsim`` (12 vector-similarity components from
per-answer embeddings) and ``all`` (their concatenation, 26 columns).
The pair-embedding matrix for the regression head lives here too.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .corpus import Corpus, scale_score
from .errors import AsagError
from .lexfeat import FUZZY_COLUMNS, HANDCRAFTED_COLUMNS, fuzzy_ratios, handcrafted_features
from .vecsim import VECSIM_COLUMNS, vecsim_features

__all__ = [
    "FEATURE_SETS",
    "feature_columns",
    "feature_matrix",
    "pair_embedding_matrix",
    "scaled_targets",
    "write_feature_csv",
]

FEATURE_SETS = ("handcrafted", "fuzzy", "vecsim", "all")


def feature_columns(feature_set: str) -> tuple[str, ...]:
    if feature_set == "handcrafted":
        return HANDCRAFTED_COLUMNS
    if feature_set == "fuzzy":
        return FUZZY_COLUMNS
    if feature_set == "vecsim":
        return VECSIM_COLUMNS
    if feature_set == "all":
        return HANDCRAFTED_COLUMNS + FUZZY_COLUMNS + VECSIM_COLUMNS
    raise AsagError(f"unknown feature set {feature_set!r} (expected one of {FEATURE_SETS})")


def feature_matrix(corpus: Corpus, feature_set: str, provider=None) -> np.ndarray:
    """Rows follow corpus order; columns follow feature_columns(feature_set)."""
    columns = feature_columns(feature_set)
    needs_vectors = feature_set in ("vecsim", "all")
    if needs_vectors and provider is None:
        raise AsagError(f"feature set {feature_set!r} needs an embedding provider")

    X = np.empty((len(corpus), len(columns)), dtype=np.float64)
    for i, pair in enumerate(corpus):
        row: list[float] = []
        if feature_set in ("handcrafted", "all"):
            counts = handcrafted_features(pair.reference_answer, pair.student_answer)
            row.extend(counts[name] for name in HANDCRAFTED_COLUMNS)
        if feature_set in ("fuzzy", "all"):
            row.extend(float(v) for v in fuzzy_ratios(pair.reference_answer, pair.student_answer))
        if needs_vectors:
            ref_vec = provider.embed_text(pair.reference_answer)
            stu_vec = provider.embed_text(pair.student_answer)
            row.extend(vecsim_features(ref_vec, stu_vec).as_row())
        X[i] = row
    return X


def pair_embedding_matrix(corpus: Corpus, provider) -> np.ndarray:
    """Pooled pair vector per corpus row, for the regression head."""
    X = np.empty((len(corpus), provider.dim), dtype=np.float64)
    for i, pair in enumerate(corpus):
        X[i] = provider.embed_pair(pair.reference_answer, pair.student_answer)
    return X


def scaled_targets(corpus: Corpus) -> np.ndarray:
    """Gold scores mapped to [0, 1]; every pair must carry one."""
    y = np.empty(len(corpus), dtype=np.float64)
    for i, pair in enumerate(corpus):
        if pair.gold_score is None:
            raise AsagError(f"pair {pair.id!r} has no gold score")
        y[i] = scale_score(pair.gold_score, corpus.score_max)
    return y


def write_feature_csv(path: str | Path, corpus: Corpus, feature_set: str, X: np.ndarray) -> None:
    """Feature matrix as CSV: id column then the set's named columns."""
    columns = feature_columns(feature_set)
    if X.shape != (len(corpus), len(columns)):
        raise AsagError(f"matrix shape {X.shape} does not match corpus/columns")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("id",) + columns)
        for pair, row in zip(corpus, X):
            writer.writerow([pair.id] + [repr(float(v)) for v in row])
