"""Question-stratified train/validation(/test) splitting with seeds.

Each question's pairs are shuffled by a SplitMix64 stream seeded from
(seed XOR hash64(question_id)) and apportioned across the parts by
largest-remainder rounding with a floor of one pair per part, so every
question contributes answers to every part. The restart controller feeds
a fresh seed per attempt to obtain a different admissible split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ._rng import SplitMix64, hash64
from .corpus import Corpus
from .errors import StratificationError

__all__ = ["SplitSpec", "stratified_split"]


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple[float, ...]
    seed: int
    stratify_by_question: bool = True

    def __post_init__(self):
        object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
        if not 1 <= len(self.fractions) <= 3:
            raise StratificationError(f"expected 1-3 fractions, got {len(self.fractions)}")
        if any(f <= 0 for f in self.fractions):
            raise StratificationError(f"fractions must be positive: {self.fractions}")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise StratificationError(f"fractions must sum to 1: {self.fractions}")


def _apportion(n: int, fractions: tuple[float, ...], floor_one: bool) -> list[int]:
    """Largest-remainder apportionment of n items; ties by part index."""
    quotas = [n * f for f in fractions]
    counts = [math.floor(q) for q in quotas]
    remainders = [q - c for q, c in zip(quotas, counts)]
    leftover = n - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        counts[i] += 1
    if floor_one:
        for i in range(len(counts)):
            while counts[i] == 0:
                donor = max(range(len(counts)), key=lambda k: (counts[k], -k))
                counts[donor] -= 1
                counts[i] += 1
    return counts


def stratified_split(corpus: Corpus, spec: SplitSpec) -> list[Corpus]:
    """Partition a corpus into len(spec.fractions) disjoint corpora.

    With stratification every question must have at least as many pairs
    as there are parts; parts preserve the input corpus order.
    """
    n_parts = len(spec.fractions)
    if n_parts == 1:
        return [corpus]

    assignment: dict[str, int] = {}
    if spec.stratify_by_question:
        groups: dict[str, list[str]] = {}
        for pair in corpus:
            groups.setdefault(pair.question_id, []).append(pair.id)
        for qid, ids in groups.items():
            if len(ids) < n_parts:
                raise StratificationError(
                    f"question {qid!r} has {len(ids)} pairs but the split needs {n_parts}"
                )
            rng = SplitMix64(spec.seed ^ hash64(qid))
            shuffled = list(ids)
            rng.shuffle(shuffled)
            counts = _apportion(len(ids), spec.fractions, floor_one=True)
            cursor = 0
            for part, count in enumerate(counts):
                for pair_id in shuffled[cursor : cursor + count]:
                    assignment[pair_id] = part
                cursor += count
    else:
        ids = [pair.id for pair in corpus]
        rng = SplitMix64(spec.seed)
        shuffled = list(ids)
        rng.shuffle(shuffled)
        counts = _apportion(len(ids), spec.fractions, floor_one=False)
        cursor = 0
        for part, count in enumerate(counts):
            for pair_id in shuffled[cursor : cursor + count]:
                assignment[pair_id] = part
            cursor += count

    parts: list[list] = [[] for _ in range(n_parts)]
    for pair in corpus:
        parts[assignment[pair.id]].append(pair)
    return [corpus.with_pairs(pairs) for pairs in parts]
