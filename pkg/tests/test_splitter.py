"""Stratified splitting: partition, stratification, determinism, seeds."""

import pytest

from asag.corpus import AnswerPair, Corpus
from asag.errors import StratificationError
from asag.splitter import SplitSpec, stratified_split


def grid_corpus(n_questions=10, per_question=10):
    pairs = []
    for q in range(n_questions):
        for s in range(per_question):
            pairs.append(
                AnswerPair(
                    id=f"q{q}s{s}",
                    question_id=f"q{q}",
                    question_text=f"question {q}",
                    reference_answer=f"reference {q}",
                    student_answer=f"student {q} {s}",
                    gold_score=float(s % 6),
                )
            )
    return Corpus(pairs=tuple(pairs), score_max=5.0)


def test_80_10_10_counts():
    corpus = grid_corpus(10, 10)
    parts = stratified_split(corpus, SplitSpec(fractions=(0.8, 0.1, 0.1), seed=40))
    assert [len(p) for p in parts] == [80, 10, 10]
    for part in parts:
        questions = {pair.question_id for pair in part}
        assert len(questions) == 10  # every question in every part


def test_partition_property():
    corpus = grid_corpus(7, 9)
    parts = stratified_split(corpus, SplitSpec(fractions=(0.8, 0.1, 0.1), seed=1))
    ids = [p.id for part in parts for p in part]
    assert len(ids) == len(corpus)
    assert set(ids) == {p.id for p in corpus}


def test_single_fraction_identity():
    corpus = grid_corpus(3, 4)
    parts = stratified_split(corpus, SplitSpec(fractions=(1.0,), seed=40))
    assert parts == [corpus]


def test_determinism():
    corpus = grid_corpus(6, 8)
    spec = SplitSpec(fractions=(0.9, 0.1), seed=40)
    assert stratified_split(corpus, spec) == stratified_split(corpus, spec)


def test_seed_sensitivity():
    corpus = grid_corpus(6, 8)
    first = stratified_split(corpus, SplitSpec(fractions=(0.9, 0.1), seed=40))
    assert any(
        stratified_split(corpus, SplitSpec(fractions=(0.9, 0.1), seed=40 + k)) != first
        for k in range(1, 11)
    )


def test_stratification_error_names_question():
    pairs = (
        AnswerPair(id="a", question_id="lonely", question_text="", reference_answer="r",
                   student_answer="s", gold_score=1.0),
        AnswerPair(id="b", question_id="lonely", question_text="", reference_answer="r",
                   student_answer="s2", gold_score=2.0),
    )
    corpus = Corpus(pairs=pairs, score_max=5.0)
    with pytest.raises(StratificationError, match="lonely"):
        stratified_split(corpus, SplitSpec(fractions=(0.8, 0.1, 0.1), seed=40))


def test_no_stratify_allows_small_questions():
    pairs = (
        AnswerPair(id="a", question_id="q1", question_text="", reference_answer="r",
                   student_answer="s", gold_score=1.0),
        AnswerPair(id="b", question_id="q2", question_text="", reference_answer="r",
                   student_answer="s2", gold_score=2.0),
        AnswerPair(id="c", question_id="q3", question_text="", reference_answer="r",
                   student_answer="s3", gold_score=3.0),
    )
    corpus = Corpus(pairs=pairs, score_max=5.0)
    parts = stratified_split(
        corpus, SplitSpec(fractions=(0.7, 0.3), seed=5, stratify_by_question=False)
    )
    assert sum(len(p) for p in parts) == 3


def test_fraction_validation():
    with pytest.raises(StratificationError):
        SplitSpec(fractions=(0.5, 0.4), seed=1)
    with pytest.raises(StratificationError):
        SplitSpec(fractions=(0.9, 0.05, 0.04, 0.01), seed=1)
    with pytest.raises(StratificationError):
        SplitSpec(fractions=(1.5, -0.5), seed=1)


def test_minimum_one_per_part():
    # 3 answers across 3 parts: floor guarantees one each
    pairs = tuple(
        AnswerPair(id=f"p{i}", question_id="q", question_text="", reference_answer="r",
                   student_answer=f"s{i}", gold_score=1.0)
        for i in range(3)
    )
    corpus = Corpus(pairs=pairs, score_max=5.0)
    parts = stratified_split(corpus, SplitSpec(fractions=(0.98, 0.01, 0.01), seed=7))
    assert [len(p) for p in parts] == [1, 1, 1]


def test_parts_preserve_input_order():
    corpus = grid_corpus(4, 6)
    order = {pair.id: i for i, pair in enumerate(corpus)}
    for part in stratified_split(corpus, SplitSpec(fractions=(0.5, 0.5), seed=3)):
        indices = [order[p.id] for p in part]
        assert indices == sorted(indices)
