"""Shared fixture builders: corpus trees on disk and synthetic datasets."""

from __future__ import annotations

import numpy as np
import pytest

from asag._rng import SplitMix64
from asag.corpus import AnswerPair, Corpus
from asag.embed import HashProvider

MOHLER_QUESTIONS = {
    "1.1": "What is a variable?",
    "1.2": "What does a loop do?",
}
MOHLER_REFERENCES = {
    "1.1": "A named storage location in memory.",
    "1.2": "It repeats a block of statements.",
}
MOHLER_STUDENTS = {
    "1.1": ["a box for values", "named memory cell", "storage with a name"],
    "1.2": ["runs code again and again", "repeats statements", "loops forever sometimes"],
}
MOHLER_SCORES = {
    "1.1": [3.5, 4.0, 5.0],
    "1.2": [4.5, 5.0, 2.0],
}


def build_mohler_tree(root, drop_score_line_for=None):
    """Write a 2-question x 3-answer Mohler-layout fixture under root."""
    sent = root / "sent"
    sent.mkdir(parents=True)
    (sent / "questions").write_text(
        "".join(f"{qid} {text}\n" for qid, text in MOHLER_QUESTIONS.items()), "utf-8"
    )
    (sent / "answers").write_text(
        "".join(f"{qid} {text}\n" for qid, text in MOHLER_REFERENCES.items()), "utf-8"
    )
    (sent / "all").write_text(
        "".join(
            f"{qid} {answer}\n"
            for qid in MOHLER_STUDENTS
            for answer in MOHLER_STUDENTS[qid]
        ),
        "utf-8",
    )
    for qid, scores in MOHLER_SCORES.items():
        qdir = root / "scores" / qid
        qdir.mkdir(parents=True)
        lines = [f"{s}\n" for s in scores]
        if drop_score_line_for == qid:
            lines = lines[:-1]
        (qdir / "ave").write_text("".join(lines), "utf-8")
    return root


SEB_XML = """<?xml version="1.0" encoding="UTF-8"?>
<question id="Q1" module="TEST">
  <questionText>Why does the bulb light up?</questionText>
  <referenceAnswers>
    <referenceAnswer id="Q1.RA1" category="BEST">The circuit is closed.</referenceAnswer>
    <referenceAnswer id="Q1.RA2" category="GOOD">Current can flow around the loop.</referenceAnswer>
  </referenceAnswers>
  <studentAnswers>
    <studentAnswer id="Q1.SA1" accuracy="correct">Because the circuit is closed.</studentAnswer>
    <studentAnswer id="Q1.SA2" accuracy="contradictory">The circuit is open.</studentAnswer>
  </studentAnswers>
</question>
"""


def build_seb_tree(root, split_dir="test-unseen-answers", xml_text=SEB_XML, filename="Q1.xml"):
    core = root / split_dir / "Core"
    core.mkdir(parents=True)
    (core / filename).write_text(xml_text, "utf-8")
    return root


def synthetic_corpus(
    n_pairs: int = 500,
    n_questions: int = 20,
    dim: int = 64,
    noise_sigma: float = 0.02,
    seed: int = 123,
    score_max: float = 5.0,
    shuffle_labels: bool = False,
) -> tuple[Corpus, HashProvider]:
    """A learnable corpus: targets are a linear functional of the hash
    embedder's pair vectors (standardized, clipped at 2 sigma) plus noise.
    """
    provider = HashProvider(dim)
    w_rng = SplitMix64(seed)
    w = np.array([2.0 * w_rng.next_unit() - 1.0 for _ in range(dim)])
    w /= np.linalg.norm(w)

    texts = []
    per_question = n_pairs // n_questions
    remainder = n_pairs - per_question * n_questions
    k = 0
    for q in range(n_questions):
        qid = f"q{q:02d}"
        reference = f"reference explanation of concept {q} uses marker words alpha{q} beta{q}"
        count = per_question + (1 if q < remainder else 0)
        for s in range(count):
            student = f"student answer {s} describing concept {q} with token gamma{q}x{s}"
            texts.append((f"p{k:04d}", qid, f"question about concept {q}", reference, student))
            k += 1

    raws = np.array(
        [float(provider.embed_pair(ref, stu) @ w) for (_, _, _, ref, stu) in texts]
    )
    z = (raws - raws.mean()) / raws.std()
    units = 0.5 + 0.225 * np.clip(z, -2.0, 2.0)
    rng = np.random.default_rng(seed)
    units = np.clip(units + rng.normal(0.0, noise_sigma, size=len(units)), 0.0, 1.0)
    if shuffle_labels:
        units = units[rng.permutation(len(units))]

    pairs = tuple(
        AnswerPair(
            id=pair_id,
            question_id=qid,
            question_text=question,
            reference_answer=ref,
            student_answer=stu,
            gold_score=float(u) * score_max,
        )
        for (pair_id, qid, question, ref, stu), u in zip(texts, units)
    )
    return Corpus(pairs=pairs, score_max=score_max, source="user_csv"), provider


@pytest.fixture
def mohler_tree(tmp_path):
    return build_mohler_tree(tmp_path / "mohler")


@pytest.fixture
def seb_tree(tmp_path):
    return build_seb_tree(tmp_path / "seb")
