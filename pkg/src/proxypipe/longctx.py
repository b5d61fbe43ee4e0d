"""Construct full long contexts by expanding seeds through the link graph.

Documents are added in breadth-first layer order out to a hop limit, with
ties within a layer broken by a seeded permutation. Expansion stops before
the first document whose inclusion would push the rendering past the token
budget. The final document order is a seeded shuffle by default so gold
documents are not positionally privileged.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from .corpus import (
    DOC_DELIMITER,
    ContextBundle,
    Corpus,
    QaInstance,
    TokenCounter,
    render_documents,
)

logger = logging.getLogger(__name__)


class LongContextError(Exception):
    pass


class MissingSeedDocument(LongContextError):
    def __init__(self, doc_id: str):
        super().__init__(f"seed document not in corpus: {doc_id!r}")
        self.doc_id = doc_id


class BudgetBelowSeeds(LongContextError):
    """The seed documents alone exceed the token budget."""


@dataclass(frozen=True)
class ExpansionConfig:
    target_tokens: int
    max_depth: int = 2
    seed: int = 0
    shuffle_final_order: bool = True


def link_closure(doc_ids: list[str], corpus: Corpus, depth: int) -> set[str]:
    """All document ids reachable within ``depth`` hops, inputs included.

    Dangling link targets are skipped and reported via logging.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    visited = set(doc_ids)
    frontier = list(doc_ids)
    for _ in range(depth):
        nxt = []
        for doc_id in frontier:
            for link in corpus.documents[doc_id].links:
                if link not in corpus.documents:
                    logger.warning("dangling link target %r from %r", link, doc_id)
                    continue
                if link not in visited:
                    visited.add(link)
                    nxt.append(link)
        frontier = nxt
    return visited


def build_long_context(instance: QaInstance, corpus: Corpus,
                       config: ExpansionConfig,
                       counter: TokenCounter) -> ContextBundle:
    for doc_id in instance.seed_docs:
        if doc_id not in corpus.documents:
            raise MissingSeedDocument(doc_id)

    included: list[str] = []
    for doc_id in instance.seed_docs:
        if doc_id not in included:
            included.append(doc_id)

    # The rendering grows incrementally; extending the text is equivalent to
    # re-rendering because documents join with a fixed delimiter.
    rendered: dict[str, str] = {}

    def render_one(doc_id: str) -> str:
        if doc_id not in rendered:
            rendered[doc_id] = corpus.documents[doc_id].render()
        return rendered[doc_id]

    current = DOC_DELIMITER.join(render_one(d) for d in included)
    if counter.count(current) > config.target_tokens:
        raise BudgetBelowSeeds(
            f"seeds of {instance.id} exceed target_tokens={config.target_tokens}")

    rng = random.Random(config.seed)
    visited = set(included)
    frontier = list(included)
    exhausted = True  # flipped off if we stop because of the budget
    for _ in range(config.max_depth):
        layer = []
        for doc_id in frontier:
            for link in corpus.documents[doc_id].links:
                if link not in corpus.documents:
                    logger.warning("dangling link target %r from %r", link, doc_id)
                    continue
                if link not in visited:
                    visited.add(link)
                    layer.append(link)
        layer.sort()
        rng.shuffle(layer)
        stopped = False
        for doc_id in layer:
            candidate = (current + DOC_DELIMITER + render_one(doc_id)
                         if current else render_one(doc_id))
            if counter.count(candidate) > config.target_tokens:
                stopped = True
                break
            current = candidate
            included.append(doc_id)
        if stopped:
            exhausted = False
            break
        frontier = layer
        if not layer:
            break

    order = list(included)
    if config.shuffle_final_order:
        random.Random(f"{config.seed}:final-order").shuffle(order)
    text = render_documents([corpus.documents[d] for d in order])
    return ContextBundle(
        instance_id=instance.id,
        doc_ids=tuple(order),
        text=text,
        token_count=counter.count(text),
        under_budget=exhausted,
    )
