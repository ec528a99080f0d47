"""Answer-pair data model, corpus parsers and CSV interchange.

Supported layouts:

* Mohler extended directory: ``sent/{answers,questions,all}`` line files
  of the form ``<question_id> <text>`` (``all`` grouped by question in
  file order) plus per-question average scores, one real per line, in
  ``scores/<question_id>/ave`` aligned with that question's lines in
  ``all``. Scores run 0..5.
* SciEntsBank 5-way XML: one file per question under
  ``{train,test-unseen-answers,test-unseen-questions,test-unseen-domains}/Core``,
  a root element with an ``id`` attribute, reference answers, and student
  answers each carrying a five-way ``accuracy`` label. Labels map to
  scores correct=2, partially_correct_incomplete=1, all others 0.
* User CSV with the exact header
  ``id,question_id,question_text,reference_answer,student_answer[,score]``.

All ingested text is NFC-normalized, trimmed, and internal whitespace
runs are collapsed; no case folding happens at this layer.
"""

from __future__ import annotations

import csv
import unicodedata
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    AlignmentError,
    CsvFormatError,
    LabelError,
    ParseError,
    ScoreRangeError,
)

__all__ = [
    "SebLabel",
    "AnswerPair",
    "Corpus",
    "SOURCES",
    "TRAIN_CSV_COLUMNS",
    "TEST_CSV_COLUMNS",
    "normalize_text",
    "map_seb_label",
    "parse_mohler",
    "parse_seb",
    "read_pairs_csv",
    "write_pairs_csv",
    "write_scored_csv",
    "read_scored_csv",
    "scale_score",
    "descale_score",
    "dedupe",
]

SOURCES = frozenset({"mohler", "seb_train", "seb_ua", "seb_uq", "seb_ud", "user_csv"})

TRAIN_CSV_COLUMNS = ("id", "question_id", "question_text", "reference_answer", "student_answer", "score")
TEST_CSV_COLUMNS = TRAIN_CSV_COLUMNS[:-1]

SEB_SPLIT_DIRS = {
    "train": "train",
    "ua": "test-unseen-answers",
    "uq": "test-unseen-questions",
    "ud": "test-unseen-domains",
}


class SebLabel(Enum):
    """The five SciEntsBank accuracy labels."""

    CORRECT = "correct"
    PARTIALLY_CORRECT_INCOMPLETE = "partially_correct_incomplete"
    CONTRADICTORY = "contradictory"
    IRRELEVANT = "irrelevant"
    NON_DOMAIN = "non_domain"


def map_seb_label(label: SebLabel) -> float:
    """Five-way label to regression score: correct 2, partial 1, rest 0."""
    if label is SebLabel.CORRECT:
        return 2.0
    if label is SebLabel.PARTIALLY_CORRECT_INCOMPLETE:
        return 1.0
    return 0.0


def normalize_text(text: str) -> str:
    """NFC, trim, collapse internal whitespace runs to single spaces."""
    return " ".join(unicodedata.normalize("NFC", text).split())


@dataclass(frozen=True)
class AnswerPair:
    """One (question, reference answer, student answer) grading unit."""

    id: str
    question_id: str
    question_text: str
    reference_answer: str
    student_answer: str
    gold_score: float | None = None
    raw_label: str | None = None

    def __post_init__(self):
        if not self.reference_answer.strip():
            raise ParseError(f"pair {self.id!r}: empty reference answer")
        if not self.student_answer.strip():
            raise ParseError(f"pair {self.id!r}: empty student answer")
        if self.raw_label is not None and self.raw_label not in {l.value for l in SebLabel}:
            raise LabelError(f"pair {self.id!r}: unknown label {self.raw_label!r}")


@dataclass(frozen=True)
class Corpus:
    """An ordered, immutable collection of answer pairs with score scale."""

    pairs: tuple[AnswerPair, ...]
    score_max: float
    source: str = "user_csv"

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if self.score_max <= 0:
            raise ScoreRangeError(f"score_max must be positive, got {self.score_max}")
        if self.source not in SOURCES:
            raise ParseError(f"unknown corpus source {self.source!r}")
        seen: set[str] = set()
        for pair in self.pairs:
            if pair.id in seen:
                raise ParseError(f"duplicate pair id {pair.id!r}")
            seen.add(pair.id)
            if pair.gold_score is not None and not 0.0 <= pair.gold_score <= self.score_max:
                raise ScoreRangeError(
                    f"pair {pair.id!r}: score {pair.gold_score} outside [0, {self.score_max}]"
                )

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def question_ids(self) -> list[str]:
        """Distinct question ids in order of first appearance."""
        seen: dict[str, None] = {}
        for pair in self.pairs:
            seen.setdefault(pair.question_id, None)
        return list(seen)

    def with_pairs(self, pairs: Iterable[AnswerPair]) -> "Corpus":
        return replace(self, pairs=tuple(pairs))


# --- Mohler extended directory ----------------------------------------------


def _read_id_line_file(path: Path) -> list[tuple[str, str]]:
    if not path.is_file():
        raise ParseError(f"missing file: {path}")
    rows = []
    for line in path.read_text("utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise ParseError(f"{path}: malformed line {line!r}")
        rows.append((parts[0], normalize_text(parts[1])))
    return rows


def parse_mohler(root_dir: str | Path) -> Corpus:
    """Parse the Mohler extended layout into a corpus with score_max 5."""
    root = Path(root_dir)
    sent = root / "sent"
    scores_dir = root / "scores"
    if not sent.is_dir():
        raise ParseError(f"missing directory: {sent}")
    if not scores_dir.is_dir():
        raise ParseError(f"missing directory: {scores_dir}")

    questions = dict(_read_id_line_file(sent / "questions"))
    references = dict(_read_id_line_file(sent / "answers"))
    student_rows = _read_id_line_file(sent / "all")

    by_question: dict[str, list[str]] = {}
    for qid, answer in student_rows:
        by_question.setdefault(qid, []).append(answer)

    pairs: list[AnswerPair] = []
    for qid, answers in by_question.items():
        if qid not in references:
            raise ParseError(f"question {qid!r} has student answers but no reference answer")
        score_file = scores_dir / qid / "ave"
        if not score_file.is_file():
            raise ParseError(f"missing file: {score_file}")
        score_lines = [ln for ln in score_file.read_text("utf-8").splitlines() if ln.strip()]
        if len(score_lines) != len(answers):
            raise AlignmentError(
                f"question {qid!r}: {len(answers)} student answers but {len(score_lines)} score lines"
            )
        for ordinal, (answer, raw_score) in enumerate(zip(answers, score_lines), 1):
            try:
                score = float(raw_score)
            except ValueError as exc:
                raise ParseError(f"{score_file}: bad score {raw_score!r}") from exc
            pairs.append(
                AnswerPair(
                    id=f"{qid}.{ordinal}",
                    question_id=qid,
                    question_text=questions.get(qid, ""),
                    reference_answer=references[qid],
                    student_answer=answer,
                    gold_score=score,
                )
            )
    return Corpus(pairs=tuple(pairs), score_max=5.0, source="mohler")


# --- SciEntsBank XML ----------------------------------------------------------


def _element_text(elem) -> str:
    return normalize_text("".join(elem.itertext()))


def _find_all_by_tag(root, tag: str):
    return list(root.iter(tag))


def _select_reference(ref_elems) -> str:
    """First reference answer, unless one carries a 'best' category."""
    chosen = None
    for elem in ref_elems:
        category = (elem.get("category") or "").strip().lower()
        if category == "best":
            chosen = elem
            break
    if chosen is None:
        chosen = ref_elems[0]
    return _element_text(chosen)


def parse_seb(root_dir: str | Path, split: str) -> Corpus:
    """Parse one SciEntsBank split into a corpus with score_max 2."""
    if split not in SEB_SPLIT_DIRS:
        raise ParseError(f"unknown SciEntsBank split {split!r} (expected train|ua|uq|ud)")
    core = Path(root_dir) / SEB_SPLIT_DIRS[split] / "Core"
    if not core.is_dir():
        raise ParseError(f"missing directory: {core}")

    valid_labels = {l.value for l in SebLabel}
    pairs: list[AnswerPair] = []
    used_ids: set[str] = set()
    for xml_path in sorted(core.glob("*.xml")):
        try:
            tree = ET.parse(xml_path)
        except ET.ParseError as exc:
            raise ParseError(f"malformed XML in {xml_path.name}: {exc}") from exc
        root = tree.getroot()
        qid = root.get("id")
        if not qid:
            raise ParseError(f"{xml_path.name}: root element has no question id attribute")

        question_elems = _find_all_by_tag(root, "questionText")
        question_text = _element_text(question_elems[0]) if question_elems else ""

        ref_elems = _find_all_by_tag(root, "referenceAnswer")
        if not ref_elems:
            raise ParseError(f"{xml_path.name}: no reference answers")
        reference = _select_reference(ref_elems)

        student_elems = _find_all_by_tag(root, "studentAnswer")
        for ordinal, elem in enumerate(student_elems, 1):
            label = elem.get("accuracy")
            if label not in valid_labels:
                raise LabelError(f"{xml_path.name}: unknown accuracy label {label!r}")
            pair_id = elem.get("id") or f"{qid}.{ordinal}"
            if pair_id in used_ids:
                pair_id = f"{pair_id}.{ordinal}"
            used_ids.add(pair_id)
            pairs.append(
                AnswerPair(
                    id=pair_id,
                    question_id=qid,
                    question_text=question_text,
                    reference_answer=reference,
                    student_answer=_element_text(elem),
                    gold_score=map_seb_label(SebLabel(label)),
                    raw_label=label,
                )
            )
    return Corpus(pairs=tuple(pairs), score_max=2.0, source=f"seb_{split}")


# --- CSV interchange ----------------------------------------------------------


def read_pairs_csv(path: str | Path, expect_scores: bool, score_max: float = 5.0) -> Corpus:
    """Read a pairs CSV. With ``expect_scores`` every row needs a valid score.

    Raises :class:`CsvFormatError` naming the missing column or the
    offending file line (header is line 1).
    """
    path = Path(path)
    if not path.is_file():
        raise CsvFormatError(f"missing file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        required = TRAIN_CSV_COLUMNS if expect_scores else TEST_CSV_COLUMNS
        for column in required:
            if column not in header:
                raise CsvFormatError(f"{path.name}: missing required column {column!r}")
        has_score = "score" in header

        pairs: list[AnswerPair] = []
        seen: set[str] = set()
        for line_no, row in enumerate(reader, 2):
            pair_id = normalize_text(row.get("id") or "")
            if not pair_id:
                raise CsvFormatError(f"{path.name} line {line_no}: empty id")
            if pair_id in seen:
                raise CsvFormatError(f"{path.name} line {line_no}: duplicate id {pair_id!r}")
            seen.add(pair_id)

            score: float | None = None
            raw_score = (row.get("score") or "").strip() if has_score else ""
            if expect_scores and not raw_score:
                raise CsvFormatError(f"{path.name} line {line_no}: missing score")
            if raw_score:
                try:
                    score = float(raw_score)
                except ValueError as exc:
                    raise CsvFormatError(f"{path.name} line {line_no}: bad score {raw_score!r}") from exc
                if not 0.0 <= score <= score_max:
                    raise CsvFormatError(
                        f"{path.name} line {line_no}: score {score} outside [0, {score_max}]"
                    )
            try:
                pairs.append(
                    AnswerPair(
                        id=pair_id,
                        question_id=normalize_text(row.get("question_id") or ""),
                        question_text=normalize_text(row.get("question_text") or ""),
                        reference_answer=normalize_text(row.get("reference_answer") or ""),
                        student_answer=normalize_text(row.get("student_answer") or ""),
                        gold_score=score,
                    )
                )
            except ParseError as exc:
                raise CsvFormatError(f"{path.name} line {line_no}: {exc}") from exc
    return Corpus(pairs=tuple(pairs), score_max=score_max, source="user_csv")


def write_pairs_csv(corpus: Corpus, path: str | Path, include_scores: bool) -> None:
    """Write a corpus back to CSV; read(write(c)) round-trips exactly."""
    columns = TRAIN_CSV_COLUMNS if include_scores else TEST_CSV_COLUMNS
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for pair in corpus:
            row = [pair.id, pair.question_id, pair.question_text, pair.reference_answer, pair.student_answer]
            if include_scores:
                row.append("" if pair.gold_score is None else repr(pair.gold_score))
            writer.writerow(row)


def write_scored_csv(corpus: Corpus, scores: Sequence[float], path: str | Path) -> None:
    """Output CSV: test columns plus predicted score at 4 decimal places."""
    if len(scores) != len(corpus):
        raise CsvFormatError(f"{len(scores)} scores for {len(corpus)} pairs")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAIN_CSV_COLUMNS)
        for pair, score in zip(corpus, scores):
            writer.writerow(
                [
                    pair.id,
                    pair.question_id,
                    pair.question_text,
                    pair.reference_answer,
                    pair.student_answer,
                    f"{score:.4f}",
                ]
            )


def read_scored_csv(path: str | Path, score_max: float) -> Corpus:
    """Read an output CSV (scores required, 4-decimal or otherwise)."""
    return read_pairs_csv(path, expect_scores=True, score_max=score_max)


# --- Scaling and duplicates ---------------------------------------------------


def scale_score(score: float, score_max: float) -> float:
    """Map a score in [0, score_max] to the unit interval."""
    if score_max <= 0:
        raise ScoreRangeError(f"score_max must be positive, got {score_max}")
    if not 0.0 <= score <= score_max:
        raise ScoreRangeError(f"score {score} outside [0, {score_max}]")
    return score / score_max


def descale_score(unit: float, score_max: float) -> float:
    """Exact inverse of :func:`scale_score` on the unit interval."""
    if score_max <= 0:
        raise ScoreRangeError(f"score_max must be positive, got {score_max}")
    if not 0.0 <= unit <= 1.0:
        raise ScoreRangeError(f"scaled score {unit} outside [0, 1]")
    return unit * score_max


def _dedupe_key(pair: AnswerPair) -> tuple[str, str, str]:
    return (
        pair.question_id,
        " ".join(pair.reference_answer.lower().split()),
        " ".join(pair.student_answer.lower().split()),
    )


def dedupe(corpus: Corpus) -> Corpus:
    """Drop repeated (question, reference, student) triples, keeping the first."""
    seen: set[tuple[str, str, str]] = set()
    kept: list[AnswerPair] = []
    for pair in corpus:
        key = _dedupe_key(pair)
        if key in seen:
            continue
        seen.add(key)
        kept.append(pair)
    return corpus.with_pairs(kept)
