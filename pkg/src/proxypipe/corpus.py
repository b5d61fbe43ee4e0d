"""Corpus loading, validation, sentence segmentation, and token counting.

On-disk format is line-delimited JSON with separate document and instance
files. Every record carries a ``format_version`` field which is checked at
load time. Documents store raw ``text`` which is segmented into sentences
on load; instances reference documents by id and sentences by index.
"""

from __future__ import annotations

import json
import logging
import math
import os
import re
import string
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

SUPPORTED_FORMATS = ("jsonl",)

DOC_DELIMITER = "\n\n"


class CorpusError(Exception):
    """Base class for corpus failures."""


class FileUnreadable(CorpusError):
    """The corpus path does not exist or cannot be read."""


class MalformedRecord(CorpusError):
    """A record failed JSON parsing or schema validation."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DanglingReference(CorpusError):
    """An instance references a missing document or out-of-range sentence."""

    def __init__(self, instance_id: str, message: str):
        super().__init__(f"instance {instance_id}: {message}")
        self.instance_id = instance_id


class VocabUnloadable(CorpusError):
    """The external vocab file for token counting cannot be loaded."""


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    body: tuple[str, ...]
    links: tuple[str, ...] = ()

    def render(self) -> str:
        """Deterministic rendering: heading line followed by the body."""
        return f"# {self.title}\n" + " ".join(self.body)


@dataclass(frozen=True)
class ArticleMeta:
    """Structured per-article metadata (title, authors, references, citations)."""

    title: str
    authors: tuple[str, ...] = ()
    n_references: int = 0
    cites: tuple[str, ...] = ()  # titles of other provided articles cited by this one


@dataclass(frozen=True)
class QaInstance:
    id: str
    question: str
    answers: tuple[str, ...]
    supporting: tuple[tuple[str, int], ...] = ()
    seed_docs: tuple[str, ...] = ()
    metadata: tuple[ArticleMeta, ...] | None = None


@dataclass(frozen=True)
class ContextBundle:
    instance_id: str
    doc_ids: tuple[str, ...]
    text: str
    token_count: int
    under_budget: bool = False


@dataclass
class Corpus:
    documents: dict[str, Document] = field(default_factory=dict)
    instances: list[QaInstance] = field(default_factory=list)

    def sentence(self, doc_id: str, idx: int) -> str:
        return self.documents[doc_id].body[idx]


# ---------------------------------------------------------------------------
# Token counting


_WS_RUN = re.compile(r"\S+")


@dataclass(frozen=True)
class TokenCounter:
    """Pluggable token-counting contract used by every budget in the pipeline.

    Modes:
      - ``whitespace``: number of maximal non-whitespace runs (the default;
        absolute counts from model tokenizers are not reproduced, only ratios
        and orderings are meaningful across counters).
      - ``chars-over-4``: ceil(len(text) / 4).
      - ``external-vocab``: greedy longest-match against a newline-delimited
        vocab file; unmatched characters count one token each.
    """

    mode: str = "whitespace"
    vocab_path: str | None = None

    def __post_init__(self):
        if self.mode not in ("whitespace", "chars-over-4", "external-vocab"):
            raise ValueError(f"unknown counter mode: {self.mode}")
        if self.mode == "external-vocab":
            object.__setattr__(self, "_vocab", self._load_vocab())

    def _load_vocab(self) -> dict[int, set[str]]:
        if not self.vocab_path:
            raise VocabUnloadable("external-vocab mode requires vocab_path")
        try:
            with open(self.vocab_path, encoding="utf-8") as f:
                tokens = [line.rstrip("\n") for line in f if line.strip()]
        except OSError as e:
            raise VocabUnloadable(str(e)) from e
        if not tokens:
            raise VocabUnloadable(f"empty vocab: {self.vocab_path}")
        by_len: dict[int, set[str]] = {}
        for t in tokens:
            by_len.setdefault(len(t), set()).add(t)
        return by_len

    def count(self, text: str) -> int:
        if self.mode == "whitespace":
            return len(_WS_RUN.findall(text))
        if self.mode == "chars-over-4":
            return math.ceil(len(text) / 4)
        return self._count_vocab(text)

    def _count_vocab(self, text: str) -> int:
        by_len = self._vocab  # type: ignore[attr-defined]
        lengths = sorted(by_len, reverse=True)
        n = 0
        i = 0
        while i < len(text):
            if text[i].isspace():
                i += 1
                continue
            for ln in lengths:
                if text[i : i + ln] in by_len[ln]:
                    i += ln
                    break
            else:
                i += 1
            n += 1
        return n


def count_tokens(counter: TokenCounter, text: str) -> int:
    return counter.count(text)


# ---------------------------------------------------------------------------
# Sentence segmentation

# Tokens that end with a period without ending a sentence.
_ABBREVIATIONS = {
    "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "vs", "etc",
    "e.g", "i.e", "fig", "eq", "no", "al", "inc", "dept", "est", "approx",
    "cf", "ca", "vol", "pp", "ed", "eds",
}

_TERMINALS = ".!?"


def _is_abbreviation(word: str) -> bool:
    w = word.rstrip(_TERMINALS).lower()
    if not w:
        return False
    # Single-letter initials ("J.") never end a sentence.
    if len(w) == 1 and w.isalpha():
        return True
    return w in _ABBREVIATIONS


def segment_sentences(raw_text: str) -> list[str]:
    """Split text into sentences on {. ! ?} followed by whitespace + capital.

    Whitespace is normalized first; joining the result with single spaces
    reconstructs the input up to whitespace normalization. A small fixed
    abbreviation allowlist suppresses false splits.
    """
    text = " ".join(raw_text.split())
    if not text:
        return []
    sentences = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINALS:
            # Swallow runs of terminal punctuation and closing quotes.
            j = i + 1
            while j < n and text[j] in _TERMINALS + "\"')":
                j += 1
            at_end = j >= n
            next_ok = not at_end and text[j] == " " and j + 1 < n and (
                text[j + 1].isupper() or text[j + 1].isdigit() or text[j + 1] in "\"'("
            )
            if at_end or next_ok:
                word = text[start:i + 1].rsplit(" ", 1)[-1]
                if not _is_abbreviation(word):
                    sentences.append(text[start:j].strip())
                    start = j + 1 if not at_end else n
                    i = j
                    continue
            i = j
        else:
            i += 1
    if start < n:
        tail = text[start:].strip()
        if tail:
            sentences.append(tail)
    return sentences


# ---------------------------------------------------------------------------
# Loading and saving

_PUNCT = set(string.punctuation)


def _require(record: dict, key: str, line_no: int):
    if key not in record:
        raise MalformedRecord(line_no, f"missing field {key!r}")
    return record[key]


def _check_version(record: dict, line_no: int):
    v = _require(record, "format_version", line_no)
    if v != FORMAT_VERSION:
        raise MalformedRecord(line_no, f"unsupported format_version {v!r}")


def _iter_jsonl(path: str):
    try:
        f = open(path, encoding="utf-8")
    except OSError as e:
        raise FileUnreadable(str(e)) from e
    with f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise MalformedRecord(line_no, f"invalid JSON: {e}") from e
            if not isinstance(record, dict):
                raise MalformedRecord(line_no, "record is not an object")
            yield line_no, record


def load_documents(path: str) -> dict[str, Document]:
    docs: dict[str, Document] = {}
    for line_no, rec in _iter_jsonl(path):
        _check_version(rec, line_no)
        doc_id = _require(rec, "id", line_no)
        if not doc_id:
            raise MalformedRecord(line_no, "empty document id")
        if doc_id in docs:
            raise MalformedRecord(line_no, f"duplicate document id {doc_id!r}")
        title = _require(rec, "title", line_no)
        text = _require(rec, "text", line_no)
        raw_links = rec.get("links", [])
        # Normalize links: drop self-references and duplicates, keep order.
        links = []
        for link in raw_links:
            if link != doc_id and link not in links:
                links.append(link)
        docs[doc_id] = Document(
            id=doc_id,
            title=title,
            body=tuple(segment_sentences(text)),
            links=tuple(links),
        )
    if not docs:
        logger.warning("no documents loaded from %s", path)
    return docs


def _parse_metadata(raw, line_no: int) -> tuple[ArticleMeta, ...] | None:
    if raw is None:
        return None
    metas = []
    for item in raw:
        if not isinstance(item, dict) or "title" not in item:
            raise MalformedRecord(line_no, "metadata entry missing title")
        metas.append(ArticleMeta(
            title=item["title"],
            authors=tuple(item.get("authors", [])),
            n_references=int(item.get("n_references", 0)),
            cites=tuple(item.get("cites", [])),
        ))
    return tuple(metas)


def _validate_instance(inst: QaInstance, docs: dict[str, Document]) -> str | None:
    """Return a rejection reason, or None if the instance is sound."""
    if not inst.answers or any(not a.strip() for a in inst.answers):
        return "empty answer list or blank answer"
    for doc_id, idx in inst.supporting:
        if doc_id not in docs:
            return f"supporting reference to missing document {doc_id!r}"
        if not 0 <= idx < len(docs[doc_id].body):
            return f"supporting sentence index {idx} out of range for {doc_id!r}"
    supporting_docs = {d for d, _ in inst.supporting}
    if not supporting_docs <= set(inst.seed_docs):
        return "seed_docs does not cover all supporting documents"
    for doc_id in inst.seed_docs:
        if doc_id not in docs:
            return f"seed reference to missing document {doc_id!r}"
    return None


def load_instances(path: str, docs: dict[str, Document],
                   strict: bool = False) -> list[QaInstance]:
    instances = []
    seen = set()
    for line_no, rec in _iter_jsonl(path):
        _check_version(rec, line_no)
        inst_id = _require(rec, "id", line_no)
        if inst_id in seen:
            raise MalformedRecord(line_no, f"duplicate instance id {inst_id!r}")
        seen.add(inst_id)
        inst = QaInstance(
            id=inst_id,
            question=_require(rec, "question", line_no),
            answers=tuple(_require(rec, "answers", line_no)),
            supporting=tuple((d, int(i)) for d, i in rec.get("supporting", [])),
            seed_docs=tuple(rec.get("seed_docs", [])),
            metadata=_parse_metadata(rec.get("metadata"), line_no),
        )
        reason = _validate_instance(inst, docs)
        if reason is not None:
            if strict:
                raise DanglingReference(inst_id, reason)
            logger.warning("rejecting instance %s: %s", inst_id, reason)
            continue
        instances.append(inst)
    return instances


def load_corpus(path: str, fmt: str = "jsonl", strict: bool = False) -> Corpus:
    """Load a corpus directory containing documents.jsonl and instances.jsonl.

    Instances with dangling references are rejected with a logged diagnostic
    (or raise DanglingReference when strict=True); documents always load.
    """
    if fmt not in SUPPORTED_FORMATS:
        raise ValueError(f"unsupported corpus format: {fmt!r}")
    if not os.path.isdir(path):
        raise FileUnreadable(f"not a directory: {path}")
    docs = load_documents(os.path.join(path, "documents.jsonl"))
    instances = load_instances(os.path.join(path, "instances.jsonl"), docs,
                               strict=strict)
    return Corpus(documents=docs, instances=instances)


def save_corpus(corpus: Corpus, path: str) -> None:
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "documents.jsonl"), "w", encoding="utf-8") as f:
        for doc in corpus.documents.values():
            f.write(json.dumps({
                "format_version": FORMAT_VERSION,
                "id": doc.id,
                "title": doc.title,
                "text": " ".join(doc.body),
                "links": list(doc.links),
            }, ensure_ascii=False) + "\n")
    with open(os.path.join(path, "instances.jsonl"), "w", encoding="utf-8") as f:
        for inst in corpus.instances:
            rec = {
                "format_version": FORMAT_VERSION,
                "id": inst.id,
                "question": inst.question,
                "answers": list(inst.answers),
                "supporting": [[d, i] for d, i in inst.supporting],
                "seed_docs": list(inst.seed_docs),
            }
            if inst.metadata is not None:
                rec["metadata"] = [
                    {
                        "title": m.title,
                        "authors": list(m.authors),
                        "n_references": m.n_references,
                        "cites": list(m.cites),
                    }
                    for m in inst.metadata
                ]
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def render_documents(docs: list[Document]) -> str:
    """Concatenate rendered documents with the fixed article delimiter."""
    return DOC_DELIMITER.join(d.render() for d in docs)
