"""Constructors for every proxy-context flavour.

A proxy context is a short evidence text standing in for a full long
context: annotated evidence sentences, rendered article metadata,
retrieval-selected sentences, random sentences, or an oracle proxy degraded
with injected noise at a fixed oracle:noise sentence ratio.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import ContextBundle, Corpus, QaInstance, TokenCounter, segment_sentences
from .retrieval import Bm25Index, EmbeddingVector, top_k_lexical, top_k_semantic

PROXY_KINDS = ("annotation", "metadata", "bm25", "embedding", "random", "noisy")

SENTENCE_JOINER = " "


class ProxyError(Exception):
    pass


class EmptySupport(ProxyError):
    pass


class MissingMetadata(ProxyError):
    pass


class EmptyContext(ProxyError):
    pass


@dataclass(frozen=True)
class ProxyContext:
    instance_id: str
    kind: str
    text: str
    token_count: int
    provenance: tuple = ()
    noise_ratio: tuple[int, int] | None = None
    truncated: bool = False  # budget below every candidate, or noise pool exhausted

    def __post_init__(self):
        if self.kind not in PROXY_KINDS:
            raise ValueError(f"unknown proxy kind: {self.kind}")
        if (self.kind == "noisy") != (self.noise_ratio is not None):
            raise ValueError("noise_ratio present iff kind is 'noisy'")


def _make(instance_id: str, kind: str, sentences: list[str], counter: TokenCounter,
          provenance=(), noise_ratio=None, truncated=False) -> ProxyContext:
    text = SENTENCE_JOINER.join(sentences)
    return ProxyContext(
        instance_id=instance_id,
        kind=kind,
        text=text,
        token_count=counter.count(text),
        provenance=tuple(provenance),
        noise_ratio=noise_ratio,
        truncated=truncated,
    )


def annotation_proxy(instance: QaInstance, corpus: Corpus,
                     counter: TokenCounter) -> ProxyContext:
    """Concatenate the annotated evidence sentences in document order."""
    if not instance.supporting:
        raise EmptySupport(instance.id)
    ordered = sorted(set(instance.supporting), key=lambda p: (
        instance.seed_docs.index(p[0]) if p[0] in instance.seed_docs else len(instance.seed_docs),
        p[0], p[1]))
    sentences = [corpus.sentence(d, i) for d, i in ordered]
    return _make(instance.id, "annotation", sentences, counter, provenance=ordered)


def _metadata_block(meta) -> str:
    lines = [
        f"Article title: {meta.title}",
        f"There are {len(meta.title.split())} words in the title (separated by spaces).",
        f"There are {len(meta.authors)} authors: {', '.join(meta.authors)}",
        f"There are {meta.n_references} references in the reference section.",
    ]
    if meta.cites:
        lines.append(
            "This article cites the following provided articles: "
            + ", ".join(meta.cites) + ".")
    else:
        lines.append("The other provided articles are not cited by this article.")
    return "\n".join(lines)


def metadata_proxy(instance: QaInstance, counter: TokenCounter) -> ProxyContext:
    """Render per-article metadata blocks, one per article, blank-line separated.

    Templates are frozen (including the count-of-one phrasing); the proxy
    text is a model-facing prompt surface where wording matters.
    """
    if not instance.metadata:
        raise MissingMetadata(instance.id)
    blocks = [_metadata_block(m) for m in instance.metadata]
    text = "\n\n".join(blocks)
    return ProxyContext(
        instance_id=instance.id,
        kind="metadata",
        text=text,
        token_count=counter.count(text),
        provenance=tuple(m.title for m in instance.metadata),
    )


def _context_sentences(bundle: ContextBundle) -> list[str]:
    """Sentence pool of a rendered full context (heading lines excluded)."""
    sentences = []
    for article in bundle.text.split("\n\n"):
        body = article.split("\n", 1)[1] if "\n" in article else article
        sentences.extend(segment_sentences(body))
    return sentences


def _fill_to_budget(sentences: list[str], budget_tokens: int,
                    counter: TokenCounter) -> tuple[list[str], bool]:
    """Take sentences in order until the next one would exceed the budget."""
    taken: list[str] = []
    for sent in sentences:
        candidate = SENTENCE_JOINER.join(taken + [sent])
        if counter.count(candidate) > budget_tokens:
            return taken, True
        taken.append(sent)
    return taken, False


def random_proxy(instance: QaInstance, bundle: ContextBundle,
                 budget_tokens: int, seed: int,
                 counter: TokenCounter) -> ProxyContext:
    """Uniform without-replacement sentence sample from the full context."""
    pool = _context_sentences(bundle)
    if not pool:
        raise EmptyContext(instance.id)
    rng = random.Random(seed)
    order = list(pool)
    rng.shuffle(order)
    taken, truncated = _fill_to_budget(order, budget_tokens, counter)
    return _make(instance.id, "random", taken, counter, truncated=truncated)


def retrieval_proxy(instance: QaInstance, bundle: ContextBundle, mode: str,
                    budget_tokens: int, counter: TokenCounter,
                    k1: float | None = None, b: float | None = None,
                    embed_fn=None) -> ProxyContext:
    """Top-ranked sentences filled to the token budget, in reading order.

    mode 'bm25' ranks lexically; mode 'embedding' ranks by cosine similarity
    of vectors obtained through ``embed_fn`` (question first, then sentences).
    Selected sentences are re-sorted into original context order before
    rendering.
    """
    if mode not in ("bm25", "embedding"):
        raise ValueError(f"unknown retrieval mode: {mode}")
    pool = _context_sentences(bundle)
    if not pool:
        raise EmptyContext(instance.id)
    sentences = dict(enumerate(pool))
    if mode == "bm25":
        kwargs = {}
        if k1 is not None:
            kwargs["k1"] = k1
        if b is not None:
            kwargs["b"] = b
        index = Bm25Index.build(sentences, **kwargs)
        ranked = top_k_lexical(index, instance.question, len(pool))
    else:
        if embed_fn is None:
            raise ValueError("embedding mode requires embed_fn")
        vectors = embed_fn([instance.question] + pool)
        qvec = vectors[0]
        candidates = [
            EmbeddingVector(values=tuple(v.values), source_id=i)
            for i, v in enumerate(vectors[1:])
        ]
        ranked = top_k_semantic(qvec, candidates, len(pool))
    taken_ids, truncated = _fill_to_budget_ranked(ranked, sentences, budget_tokens, counter)
    ordered = sorted(taken_ids)
    return _make(instance.id, mode, [sentences[i] for i in ordered], counter,
                 provenance=ordered, truncated=truncated)


def _fill_to_budget_ranked(ranked_ids, sentences, budget_tokens, counter):
    taken: list = []
    for sid in ranked_ids:
        candidate = SENTENCE_JOINER.join([sentences[i] for i in taken] + [sentences[sid]])
        if counter.count(candidate) > budget_tokens:
            return taken, True
        taken.append(sid)
    return taken, False


class InsufficientNoisePool(ProxyError):
    """Fewer non-oracle sentences than requested; the max available is used."""


def noisy_proxy(oracle: ProxyContext, bundle: ContextBundle,
                ratio_noise: int, seed: int, counter: TokenCounter,
                extra_pool: list[str] | None = None) -> ProxyContext:
    """Interleave k noise sentences per oracle sentence into the oracle proxy.

    Noise is sampled uniformly without replacement from the instance's full
    context (or ``extra_pool`` when given, for corpus-wide sampling),
    excluding sentences already in the oracle. The seeded interleaving
    preserves the relative order of oracle sentences. ratio_noise = 0
    returns the oracle text unchanged with kind 'noisy' and ratio (1, 0).
    """
    if oracle.kind not in ("annotation", "metadata"):
        raise ProxyError(f"noisy proxies degrade annotation/metadata oracles, "
                         f"got {oracle.kind!r}")
    if ratio_noise < 0:
        raise ValueError("ratio_noise must be >= 0")
    oracle_sentences = segment_sentences(oracle.text)
    if ratio_noise == 0:
        return ProxyContext(
            instance_id=oracle.instance_id,
            kind="noisy",
            text=oracle.text,
            token_count=counter.count(oracle.text),
            provenance=oracle.provenance,
            noise_ratio=(1, 0),
        )
    pool_source = extra_pool if extra_pool is not None else _context_sentences(bundle)
    oracle_set = set(oracle_sentences)
    pool = [s for s in pool_source if s not in oracle_set]
    wanted = ratio_noise * len(oracle_sentences)
    truncated = len(pool) < wanted
    n_noise = min(wanted, len(pool))
    rng = random.Random(seed)
    noise = rng.sample(pool, n_noise)
    total = len(oracle_sentences) + n_noise
    noise_positions = set(rng.sample(range(total), n_noise))
    merged = []
    oracle_iter = iter(oracle_sentences)
    noise_iter = iter(noise)
    for pos in range(total):
        merged.append(next(noise_iter) if pos in noise_positions else next(oracle_iter))
    return _make(
        oracle.instance_id, "noisy", merged, counter,
        provenance=oracle.provenance,
        noise_ratio=(1, ratio_noise),
        truncated=truncated,
    )
