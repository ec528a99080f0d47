"""Handcrafted lexical features and fuzzy string-similarity ratios.

Count features (common words / stop words / tokens by min and max,
boundary-word equality, length statistics) are computed over stemmed
tokens against a frozen 179-word stop list bundled with the package.
The four fuzzy ratios share one base ratio built on indel distance,
which is exactly reproducible from a longest-common-subsequence count:

    d_indel(a, b) = |a| + |b| - 2 * LCS(a, b)
    base_ratio    = 100 * (1 - d_indel / (|a| + |b|)), rounded half-up

Stemming applies to the count features only; the ratios operate on
normalized raw text.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources

from .errors import DegenerateInputError

__all__ = [
    "LEXFEAT_COLUMNS",
    "HANDCRAFTED_COLUMNS",
    "FUZZY_COLUMNS",
    "LexFeatures",
    "stopwords",
    "tokenize",
    "porter_stem",
    "handcrafted_features",
    "base_ratio",
    "fuzzy_ratios",
    "lex_features",
]

HANDCRAFTED_COLUMNS = (
    "cwc_min",
    "cwc_max",
    "csc_min",
    "csc_max",
    "ctc_min",
    "ctc_max",
    "last_word_eq",
    "first_word_eq",
    "abs_len_diff",
    "mean_len",
)

FUZZY_COLUMNS = ("fuzz_ratio", "fuzz_partial_ratio", "token_sort_ratio", "token_set_ratio")

LEXFEAT_COLUMNS = HANDCRAFTED_COLUMNS + FUZZY_COLUMNS


@dataclass(frozen=True)
class LexFeatures:
    cwc_min: float
    cwc_max: float
    csc_min: float
    csc_max: float
    ctc_min: float
    ctc_max: float
    last_word_eq: int
    first_word_eq: int
    abs_len_diff: int
    mean_len: float
    fuzz_ratio: int
    fuzz_partial_ratio: int
    token_sort_ratio: int
    token_set_ratio: int

    def as_row(self) -> list[float]:
        return [float(getattr(self, name)) for name in LEXFEAT_COLUMNS]


def stopwords() -> frozenset[str]:
    """The bundled, frozen English stop-word list (179 words)."""
    return _STOPWORDS


def _load_stopwords() -> frozenset[str]:
    text = resources.files("asag.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return frozenset(text.split())


_STOPWORDS = _load_stopwords()


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Lowercase, NFC-normalize, split on whitespace, strip edge punctuation."""
    normalized = unicodedata.normalize("NFC", text).lower()
    tokens = []
    for raw in normalized.split():
        start, end = 0, len(raw)
        while start < end and _is_punct(raw[start]):
            start += 1
        while end > start and _is_punct(raw[end - 1]):
            end -= 1
        if end > start:
            tokens.append(raw[start:end])
    return tokens


# --- Porter (1980) stemmer -------------------------------------------------

_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-to-consonant transitions: m in [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        if _is_consonant(stem, i):
            if prev_vowel:
                m += 1
            prev_vowel = False
        else:
            prev_vowel = True
    return m


def _contains_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_consonant(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    if not (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
    ):
        return False
    return word[-1] not in "wxy"


def _rule_step(word: str, rules: list[tuple[str, str, int]]) -> str:
    """Apply the longest-suffix rule whose measure condition holds.

    Porter's steps 2-4: the longest matching suffix selects the single
    candidate rule; if its condition fails, the step changes nothing.
    """
    best = None
    for suffix, replacement, min_measure in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, replacement, min_measure)
    if best is None:
        return word
    suffix, replacement, min_measure = best
    stem = word[: len(word) - len(suffix)]
    if _measure(stem) > min_measure:
        return stem + replacement
    return word


_STEP2_RULES = [
    ("ational", "ate", 0), ("tional", "tion", 0), ("enci", "ence", 0),
    ("anci", "ance", 0), ("izer", "ize", 0), ("abli", "able", 0),
    ("alli", "al", 0), ("entli", "ent", 0), ("eli", "e", 0),
    ("ousli", "ous", 0), ("ization", "ize", 0), ("ation", "ate", 0),
    ("ator", "ate", 0), ("alism", "al", 0), ("iveness", "ive", 0),
    ("fulness", "ful", 0), ("ousness", "ous", 0), ("aliti", "al", 0),
    ("iviti", "ive", 0), ("biliti", "ble", 0),
]

_STEP3_RULES = [
    ("icate", "ic", 0), ("ative", "", 0), ("alize", "al", 0),
    ("iciti", "ic", 0), ("ical", "ic", 0), ("ful", "", 0), ("ness", "", 0),
]

_STEP4_SUFFIXES = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def porter_stem(word: str) -> str:
    """Porter (1980) stemming algorithm for lowercase English words."""
    if len(word) <= 2:
        return word

    # Step 1a
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif word.endswith("ss"):
        pass
    elif word.endswith("s"):
        word = word[:-1]

    # Step 1b
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
    else:
        removed = False
        if word.endswith("ed") and _contains_vowel(word[:-2]):
            word = word[:-2]
            removed = True
        elif word.endswith("ing") and _contains_vowel(word[:-3]):
            word = word[:-3]
            removed = True
        if removed:
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _ends_double_consonant(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _measure(word) == 1 and _ends_cvc(word):
                word += "e"

    # Step 1c
    if word.endswith("y") and _contains_vowel(word[:-1]):
        word = word[:-1] + "i"

    word = _rule_step(word, _STEP2_RULES)
    word = _rule_step(word, _STEP3_RULES)

    # Step 4: bare deletion for m > 1, with the (s|t)ion guard
    best = None
    for suffix in _STEP4_SUFFIXES:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best)):
            best = suffix
    if best is not None:
        stem = word[: len(word) - len(best)]
        if _measure(stem) > 1 and (best != "ion" or (stem and stem[-1] in "st")):
            word = stem

    # Step 5a
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # Step 5b
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        word = word[:-1]

    return word


# --- Count features ---------------------------------------------------------


def handcrafted_features(reference: str, student: str) -> dict[str, float]:
    """The ten count/boundary features over stemmed tokens.

    Stop-word membership is decided on the raw lowercased token; set
    intersections compare stemmed forms within each class. Any ratio with
    a zero denominator is 0.
    """
    tokens_r = tokenize(reference)
    tokens_s = tokenize(student)
    if not tokens_r or not tokens_s:
        raise DegenerateInputError("an answer is empty after tokenization")

    def classify(tokens: list[str]) -> tuple[set[str], set[str], set[str]]:
        words, stops, all_stems = set(), set(), set()
        for tok in tokens:
            stem = porter_stem(tok)
            all_stems.add(stem)
            (stops if tok in _STOPWORDS else words).add(stem)
        return words, stops, all_stems

    words_r, stops_r, all_r = classify(tokens_r)
    words_s, stops_s, all_s = classify(tokens_s)

    def ratio(common: int, a: int, b: int, use_min: bool) -> float:
        den = min(a, b) if use_min else max(a, b)
        return common / den if den else 0.0

    cw = len(words_r & words_s)
    cs = len(stops_r & stops_s)
    ct = len(all_r & all_s)
    return {
        "cwc_min": ratio(cw, len(words_r), len(words_s), True),
        "cwc_max": ratio(cw, len(words_r), len(words_s), False),
        "csc_min": ratio(cs, len(stops_r), len(stops_s), True),
        "csc_max": ratio(cs, len(stops_r), len(stops_s), False),
        "ctc_min": ratio(ct, len(all_r), len(all_s), True),
        "ctc_max": ratio(ct, len(all_r), len(all_s), False),
        "last_word_eq": int(tokens_r[-1] == tokens_s[-1]),
        "first_word_eq": int(tokens_r[0] == tokens_s[0]),
        "abs_len_diff": abs(len(tokens_r) - len(tokens_s)),
        "mean_len": (len(tokens_r) + len(tokens_s)) / 2.0,
    }


# --- Fuzzy ratios -----------------------------------------------------------


def _lcs_length(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0]
        append = cur.append
        for j, cb in enumerate(b, 1):
            if ca == cb:
                append(prev[j - 1] + 1)
            else:
                pj = prev[j]
                cj = cur[j - 1]
                append(pj if pj >= cj else cj)
        prev = cur
    return prev[-1]


def base_ratio(a: str, b: str) -> int:
    """Indel similarity in 0..100: 100·(1 − d_indel/(|a|+|b|)), half-up."""
    den = len(a) + len(b)
    if den == 0:
        return 100
    # 100*(1 - d/den) = 200*LCS/den; integer round-half-up of n/d is (2n+d)//(2d)
    num = 200 * _lcs_length(a, b)
    return (2 * num + den) // (2 * den)


def _normalize_for_ratio(text: str) -> str:
    return " ".join(unicodedata.normalize("NFC", text).lower().split())


def _partial_ratio(a: str, b: str) -> int:
    shorter, longer = (a, b) if len(a) <= len(b) else (b, a)
    window = len(shorter)
    best = 0
    for start in range(len(longer) - window + 1):
        score = base_ratio(shorter, longer[start : start + window])
        if score > best:
            best = score
            if best == 100:
                break
    return best


def _join(parts: list[str]) -> str:
    return " ".join(p for p in parts if p)


def fuzzy_ratios(reference: str, student: str) -> tuple[int, int, int, int]:
    """(fuzz_ratio, fuzz_partial_ratio, token_sort_ratio, token_set_ratio)."""
    a = _normalize_for_ratio(reference)
    b = _normalize_for_ratio(student)

    plain = base_ratio(a, b)
    partial = _partial_ratio(a, b)

    tokens_a = tokenize(reference)
    tokens_b = tokenize(student)
    token_sort = base_ratio(" ".join(sorted(tokens_a)), " ".join(sorted(tokens_b)))

    inter = sorted(set(tokens_a) & set(tokens_b))
    only_a = sorted(set(tokens_a) - set(tokens_b))
    only_b = sorted(set(tokens_b) - set(tokens_a))
    t0 = " ".join(inter)
    t1 = _join([t0, " ".join(only_a)])
    t2 = _join([t0, " ".join(only_b)])
    token_set = max(base_ratio(t0, t1), base_ratio(t0, t2), base_ratio(t1, t2))

    return plain, partial, token_sort, token_set


def lex_features(reference: str, student: str) -> LexFeatures:
    """The full 14-component lexical feature record."""
    counts = handcrafted_features(reference, student)
    fr, fpr, tsr, tstr = fuzzy_ratios(reference, student)
    return LexFeatures(
        fuzz_ratio=fr,
        fuzz_partial_ratio=fpr,
        token_sort_ratio=tsr,
        token_set_ratio=tstr,
        **counts,
    )
