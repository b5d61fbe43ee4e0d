"""Answer normalization, exact match, token F1, verifiable reward, extraction.

The reward is the sum of token F1 and exact match, so it lies in [0, 2] and
equals 2 exactly when the normalized prediction matches a gold answer.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass

DEFAULT_ANSWER_MARKER = "Final Answer:"

_ARTICLES = {"a", "an", "the"}
_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation})


class NoAnswerFound(Exception):
    """The final-answer marker is absent from a generation."""


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation, drop articles, collapse whitespace.

    Punctuation is replaced by spaces (so hyphenated terms split into
    tokens) before article removal. Idempotent.
    """
    text = text.lower().translate(_PUNCT_TABLE)
    return " ".join(t for t in text.split() if t not in _ARTICLES)


def answer_tokens(text: str) -> list[str]:
    """Shared tokenization for F1 and lexical retrieval."""
    return normalize_answer(text).split()


def exact_match(gold: list[str], pred: str, normalized: bool = True) -> int:
    if not gold:
        raise ValueError("gold answer list must be non-empty")
    if normalized:
        p = normalize_answer(pred)
        return int(any(normalize_answer(g) == p for g in gold))
    return int(any(g == pred for g in gold))


def _f1_single(gold: str, pred: str) -> float:
    g = answer_tokens(gold)
    p = answer_tokens(pred)
    if not g and not p:
        return 1.0
    if not g or not p:
        return 0.0
    overlap = sum((Counter(g) & Counter(p)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(p)
    recall = overlap / len(g)
    return 2 * precision * recall / (precision + recall)


def token_f1(gold: list[str], pred: str) -> float:
    """Max over golds of bag-of-token F1 between normalized answers."""
    if not gold:
        raise ValueError("gold answer list must be non-empty")
    return max(_f1_single(g, pred) for g in gold)


def reward(gold: list[str], pred: str) -> float:
    """Verifiable reward: token F1 plus exact match, in [0, 2]."""
    return token_f1(gold, pred) + exact_match(gold, pred)


def lenient_match(gold: list[str], pred: str) -> bool:
    """Normalized equality or substring containment in either direction.

    A judge-free screening check: stricter than F1 overlap, looser than EM.
    Useful for replaying judge few-shot cases without an endpoint; the
    genuinely semantic equivalences (abbreviations, paraphrases) still
    need a model judge.
    """
    p = normalize_answer(pred)
    if not p:
        return False
    for g in gold:
        ng = normalize_answer(g)
        if ng and (ng == p or ng in p or p in ng):
            return True
    return False


@dataclass(frozen=True)
class ScoredAnswer:
    raw: str
    normalized: str
    em: int
    f1: float
    reward: float


def score_answer(gold: list[str], pred: str) -> ScoredAnswer:
    em = exact_match(gold, pred)
    f1 = token_f1(gold, pred)
    return ScoredAnswer(
        raw=pred,
        normalized=normalize_answer(pred),
        em=em,
        f1=f1,
        reward=f1 + em,
    )


def extract_answer(generation: str,
                   marker: str = DEFAULT_ANSWER_MARKER) -> str:
    """Return the text after the last occurrence of the answer marker.

    The answer is the first non-empty line following the marker (the rest of
    the marker's own line when the answer is inline). Raises NoAnswerFound
    when the marker is absent; callers treat that as an incorrect trace.
    """
    idx = generation.rfind(marker)
    if idx < 0:
        raise NoAnswerFound(f"marker {marker!r} not found")
    rest = generation[idx + len(marker):]
    for line in rest.splitlines() or [rest]:
        stripped = line.strip()
        if stripped:
            return stripped
    return rest.strip()
