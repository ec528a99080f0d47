"""Parsing answer corpora and splitting them by question.

Builds a small Mohler-layout directory tree and a SciEntsBank-style XML
file on disk, parses both into corpora, removes duplicate answer pairs,
and produces a question-stratified 80-10-10 split.
"""

import tempfile
from pathlib import Path

from asag import SplitSpec, dedupe, parse_mohler, parse_seb, stratified_split

workdir = Path(tempfile.mkdtemp(prefix="asag-demo-"))

# --- a tiny Mohler-style tree ------------------------------------------------
# sent/{questions,answers,all} are "<question_id> <text>" line files;
# scores/<qid>/ave holds one average grade per student line.
sent = workdir / "mohler" / "sent"
sent.mkdir(parents=True)
(sent / "questions").write_text(
    "1.1 What is the role of a prototype program?\n"
    "1.2 How are arguments passed by reference?\n"
)
(sent / "answers").write_text(
    "1.1 To simulate the behaviour of portions of the desired software product.\n"
    "1.2 By passing the address of the variable.\n"
)
(sent / "all").write_text(
    "1.1 it simulates parts of the final product\n"
    "1.1 a mock up used for exploration\n"
    "1.1 simulates the desired software\n"
    "1.2 by reference\n"
    "1.2 by reference\n"
    "1.2 passing a pointer to the variable\n"
)
for qid, scores in {"1.1": (5.0, 4.0, 4.5), "1.2": (5.0, 5.0, 4.0)}.items():
    score_dir = workdir / "mohler" / "scores" / qid
    score_dir.mkdir(parents=True)
    (score_dir / "ave").write_text("".join(f"{s}\n" for s in scores))

corpus = parse_mohler(workdir / "mohler")
print(f"parsed Mohler fixture: {len(corpus)} pairs, score scale 0..{corpus.score_max}")

# two students answered "by reference" to the same question; dedupe keeps one
deduped = dedupe(corpus)
print(f"after dedupe: {len(deduped)} pairs (dropped {len(corpus) - len(deduped)} duplicate)")

# --- a SciEntsBank-style XML file ---------------------------------------------
core = workdir / "seb" / "test-unseen-answers" / "Core"
core.mkdir(parents=True)
(core / "EM-21b.xml").write_text(
    """<question id="EM-21b" module="EM">
  <questionText>Why does the bulb light up?</questionText>
  <referenceAnswers>
    <referenceAnswer id="EM-21b.a1" category="BEST">The circuit is closed.</referenceAnswer>
  </referenceAnswers>
  <studentAnswers>
    <studentAnswer id="EM-21b.s1" accuracy="correct">Because the circuit is closed.</studentAnswer>
    <studentAnswer id="EM-21b.s2" accuracy="partially_correct_incomplete">Electricity.</studentAnswer>
    <studentAnswer id="EM-21b.s3" accuracy="contradictory">The circuit is open.</studentAnswer>
  </studentAnswers>
</question>
"""
)
seb = parse_seb(workdir / "seb", "ua")
print(f"\nparsed SciEntsBank fixture: {len(seb)} pairs, score scale 0..{seb.score_max}")
for pair in seb:
    print(f"  {pair.id}: label={pair.raw_label:<30} score={pair.gold_score}")

# --- question-stratified splitting ---------------------------------------------
train, val, test = stratified_split(corpus, SplitSpec(fractions=(0.8, 0.1, 0.1), seed=40))
print(f"\nstratified 80-10-10 split: {len(train)}/{len(val)}/{len(test)} pairs")
for name, part in (("train", train), ("val", val), ("test", test)):
    questions = sorted({p.question_id for p in part})
    print(f"  {name}: questions {questions}")
