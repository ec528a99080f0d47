"""Similarity measures and distribution moments over embedding vectors.

Eight pairwise metrics (cosine, euclidean, manhattan, canberra, Minkowski
order 3, Bray-Curtis, Dice, Jaccard) plus skewness and excess kurtosis of
each vector's components form the 12-component vector-similarity feature
set. Dice and Jaccard take their continuous (Tanimoto-style) forms; the
Minkowski order is fixed at 3 so it is not redundant with the L1/L2
distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError

__all__ = [
    "VECSIM_COLUMNS",
    "METRICS",
    "VecSimFeatures",
    "vector_similarity",
    "moments",
    "vecsim_features",
]

VECSIM_COLUMNS = (
    "cosine",
    "euclidean",
    "manhattan",
    "canberra",
    "minkowski3",
    "braycurtis",
    "dice",
    "jaccard",
    "skew_ref",
    "kurt_ref",
    "skew_stu",
    "kurt_stu",
)

METRICS = ("cosine", "euclidean", "manhattan", "canberra", "minkowski3", "braycurtis", "dice", "jaccard")


@dataclass(frozen=True)
class VecSimFeatures:
    cosine: float
    euclidean: float
    manhattan: float
    canberra: float
    minkowski3: float
    braycurtis: float
    dice: float
    jaccard: float
    skew_ref: float
    kurt_ref: float
    skew_stu: float
    kurt_stu: float

    def as_row(self) -> list[float]:
        return [getattr(self, name) for name in VECSIM_COLUMNS]


def _as_pair(u, v) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 1 or v.ndim != 1 or u.shape != v.shape:
        raise UndefinedMetricError(f"dimension mismatch: {u.shape} vs {v.shape}")
    if u.size < 1:
        raise UndefinedMetricError("vectors must have at least one component")
    return u, v


def vector_similarity(u, v, metric: str) -> float:
    """One of the eight pairwise metrics between equal-dimension vectors."""
    u, v = _as_pair(u, v)
    if metric == "cosine":
        nu = np.linalg.norm(u)
        nv = np.linalg.norm(v)
        if nu == 0.0 or nv == 0.0:
            raise UndefinedMetricError("cosine undefined for a zero vector")
        return float(np.dot(u, v) / (nu * nv))
    if metric == "euclidean":
        return float(np.linalg.norm(u - v))
    if metric == "manhattan":
        return float(np.sum(np.abs(u - v)))
    if metric == "canberra":
        num = np.abs(u - v)
        den = np.abs(u) + np.abs(v)
        terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
        return float(np.sum(terms))
    if metric == "minkowski3":
        return float(np.sum(np.abs(u - v) ** 3) ** (1.0 / 3.0))
    if metric == "braycurtis":
        den = float(np.sum(np.abs(u + v)))
        if den == 0.0:
            raise UndefinedMetricError("braycurtis undefined: |u+v| sums to zero")
        return float(np.sum(np.abs(u - v)) / den)
    if metric == "dice":
        den = float(np.dot(u, u) + np.dot(v, v))
        if den == 0.0:
            raise UndefinedMetricError("dice undefined for two zero vectors")
        return float(2.0 * np.dot(u, v) / den)
    if metric == "jaccard":
        dot = float(np.dot(u, v))
        den = float(np.dot(u, u) + np.dot(v, v)) - dot
        if den == 0.0:
            raise UndefinedMetricError("jaccard undefined: zero denominator")
        return float(dot / den)
    raise UndefinedMetricError(f"unknown metric {metric!r}")


def moments(v) -> tuple[float, float]:
    """Population skewness and excess kurtosis of a vector's components."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size < 2:
        raise UndefinedMetricError("moments need a vector of dimension >= 2")
    centered = v - v.mean()
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise UndefinedMetricError("moments undefined: zero variance")
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    return m3 / m2**1.5, m4 / m2**2 - 3.0


def vecsim_features(ref_vec, stu_vec) -> VecSimFeatures:
    """All 8 metrics between the two vectors plus the moments of each."""
    skew_ref, kurt_ref = moments(ref_vec)
    skew_stu, kurt_stu = moments(stu_vec)
    values = {m: vector_similarity(ref_vec, stu_vec, m) for m in METRICS}
    return VecSimFeatures(
        skew_ref=skew_ref,
        kurt_ref=kurt_ref,
        skew_stu=skew_stu,
        kurt_stu=kurt_stu,
        **values,
    )
