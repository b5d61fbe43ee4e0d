"""Sentence ranking against a question: Okapi BM25 and cosine similarity.

Terms are produced by the scoring module's answer tokenization so lexical
retrieval and F1 share one normalization. Sentence ids can be any hashable,
orderable values; ties are broken by ascending id.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .scoring import answer_tokens

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


class RetrievalError(Exception):
    pass


class UnknownSentence(RetrievalError):
    pass


class DimensionMismatch(RetrievalError):
    pass


class ZeroVector(RetrievalError):
    pass


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    source_id: object = None

    def __post_init__(self):
        for v in self.values:
            if math.isnan(v) or math.isinf(v):
                raise ValueError("embedding contains NaN/Inf")


@dataclass
class Bm25Index:
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    postings: dict[str, dict[object, int]] = field(default_factory=dict)
    doc_len: dict[object, int] = field(default_factory=dict)
    avg_len: float = 0.0

    @property
    def n_docs(self) -> int:
        return len(self.doc_len)

    @classmethod
    def build(cls, sentences: dict[object, str],
              k1: float = DEFAULT_K1, b: float = DEFAULT_B) -> "Bm25Index":
        index = cls(k1=k1, b=b)
        for sid, text in sentences.items():
            terms = answer_tokens(text)
            index.doc_len[sid] = len(terms)
            for term, tf in Counter(terms).items():
                index.postings.setdefault(term, {})[sid] = tf
        if index.doc_len:
            index.avg_len = sum(index.doc_len.values()) / len(index.doc_len)
        return index

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, {}))
        return math.log(1 + (self.n_docs - df + 0.5) / (df + 0.5))


def bm25_score(index: Bm25Index, query_terms: list[str], sentence_id) -> float:
    if sentence_id not in index.doc_len:
        raise UnknownSentence(repr(sentence_id))
    dl = index.doc_len[sentence_id]
    norm = index.k1 * (1 - index.b + index.b * dl / index.avg_len) if index.avg_len else index.k1
    score = 0.0
    for term in query_terms:
        tf = index.postings.get(term, {}).get(sentence_id, 0)
        if tf == 0:
            continue
        score += index.idf(term) * tf * (index.k1 + 1) / (tf + norm)
    return score


def top_k_lexical(index: Bm25Index, question: str, k: int) -> list:
    """Sentence ids in descending BM25 score order, ties by ascending id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    terms = answer_tokens(question)
    scored = [(-bm25_score(index, terms, sid), sid) for sid in index.doc_len]
    scored.sort()
    return [sid for _, sid in scored[:k]]


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if len(a.values) != len(b.values):
        raise DimensionMismatch(f"{len(a.values)} vs {len(b.values)}")
    na = math.sqrt(sum(v * v for v in a.values))
    nb = math.sqrt(sum(v * v for v in b.values))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("zero-norm embedding")
    dot = sum(x * y for x, y in zip(a.values, b.values))
    return dot / (na * nb)


def top_k_semantic(question_vec: EmbeddingVector,
                   candidates: list[EmbeddingVector], k: int) -> list:
    """Source ids in descending cosine similarity, ties by ascending id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not candidates:
        raise ValueError("candidate list must be non-empty")
    scored = [(-cosine_similarity(question_vec, c), c.source_id) for c in candidates]
    scored.sort()
    return [sid for _, sid in scored[:k]]
