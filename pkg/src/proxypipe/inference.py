"""Client for OpenAI-compatible chat-completion and embedding endpoints.

All model parameters live behind the endpoint; this module only speaks the
wire protocol. Requests retry on timeouts/429/5xx with exponential backoff
plus jitter, concurrency is bounded by a semaphore shared across threads,
and every request/response pair can be logged to a line-delimited
transcript for audit and replay.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass

import httpx

from .retrieval import EmbeddingVector

logger = logging.getLogger(__name__)

API_KEY_ENV = "PROXYPIPE_API_KEY"


class EndpointError(Exception):
    pass


class Timeout(EndpointError):
    pass


class RateLimited(EndpointError):
    pass


class MalformedResponse(EndpointError):
    pass


class ContextOverflow(EndpointError):
    """The endpoint rejected the prompt as exceeding its context length."""


class DimensionInconsistent(EndpointError):
    pass


class UnparseableVerdict(EndpointError):
    """The judge response matched neither 'correct' nor 'incorrect'."""


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model_name: str
    api_key: str | None = None
    timeout: float = 60.0
    max_retries: int = 3
    max_parallel: int = 4
    backoff_base: float = 0.25
    backoff_cap: float = 8.0

    def resolve_api_key(self) -> str | None:
        return self.api_key or os.environ.get(API_KEY_ENV)


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 0.7
    top_p: float = 0.8
    top_k: int = 20
    min_p: float = 0.0
    max_tokens: int = 32768
    n: int = 1

    def to_wire(self) -> dict:
        # Every field goes on the wire exactly as configured.
        return {
            "temperature": self.temperature,
            "top_p": self.top_p,
            "top_k": self.top_k,
            "min_p": self.min_p,
            "max_tokens": self.max_tokens,
            "n": self.n,
        }


# Few-shot judging template; {QUESTION}/{GROUND_TRUTH}/{PREDICTION} are the
# substitution slots, ground truth is rendered as a JSON list.
JUDGE_TEMPLATE = """\
You need to check whether the prediction of a question-answering system to a question is correct.
You should make the judgment based on a list of ground truth answers provided to you.
Your response should be "correct" if the prediction is correct or "incorrect" if the prediction is wrong.

Question: Who authored The Taming of the Shrew (published in 2002)?
Ground truth: ["William Shakespeare", "Roma Gill"]
Prediction: W Shakespeare
Correctness: correct

Question: Who authored The Taming of the Shrew (published in 2002)?
Ground truth: ["William Shakespeare", "Roma Gill"]
Prediction: Roma Gill and W Shakespeare
Correctness: correct

Question: Who authored The Taming of the Shrew (published in 2002)?
Ground truth: ["William Shakespeare", "Roma Gill"]
Prediction: Roma Shakespeare
Correctness: incorrect

Question: What country is Maharashtra Metro Rail Corporation Limited located in?
Ground truth: ["India"]
Prediction: Maharashtra
Correctness: incorrect

Question: What's the job of Song Kang-ho in Parasite (2019)?
Ground truth: ["actor"]
Prediction: He plays the role of Kim Ki-taek, the patriarch of the Kim family.
Correctness: correct

Question: Which era did Michael Oakeshott belong to?
Ground truth: ["20th-century philosophy"]
Prediction: 20th century.
Correctness: correct

Question: Edward Tise (known for Full Metal Jacket (1987)) is in what department?
Ground truth: ["sound department"]
Prediction: 2nd Infantry Division, United States Army
Correctness: incorrect

Question: What wine region is Finger Lakes AVA a part of?
Ground truth: ["New York wine"]
Prediction: Finger Lakes AVA
Correctness: incorrect

Question: {QUESTION}
Ground truth: {GROUND_TRUTH}
Prediction: {PREDICTION}
Correctness:"""

# The eight few-shot blocks above, as (question, golds, prediction, label).
JUDGE_FEWSHOT_CASES = [
    ("Who authored The Taming of the Shrew (published in 2002)?",
     ["William Shakespeare", "Roma Gill"], "W Shakespeare", "correct"),
    ("Who authored The Taming of the Shrew (published in 2002)?",
     ["William Shakespeare", "Roma Gill"], "Roma Gill and W Shakespeare", "correct"),
    ("Who authored The Taming of the Shrew (published in 2002)?",
     ["William Shakespeare", "Roma Gill"], "Roma Shakespeare", "incorrect"),
    ("What country is Maharashtra Metro Rail Corporation Limited located in?",
     ["India"], "Maharashtra", "incorrect"),
    ("What's the job of Song Kang-ho in Parasite (2019)?",
     ["actor"], "He plays the role of Kim Ki-taek, the patriarch of the Kim family.",
     "correct"),
    ("Which era did Michael Oakeshott belong to?",
     ["20th-century philosophy"], "20th century.", "correct"),
    ("Edward Tise (known for Full Metal Jacket (1987)) is in what department?",
     ["sound department"], "2nd Infantry Division, United States Army", "incorrect"),
    ("What wine region is Finger Lakes AVA a part of?",
     ["New York wine"], "Finger Lakes AVA", "incorrect"),
]

# Indices (0-based) of the few-shot cases whose labels rest on semantic
# equivalence (abbreviation expansion, role paraphrase); a scoring-only
# replay cannot decide these.
JUDGE_SEMANTIC_CASES = (0, 4)


def render_judge_prompt(question: str, gold: list[str], prediction: str) -> str:
    prompt = JUDGE_TEMPLATE
    prompt = prompt.replace("{QUESTION}", question)
    prompt = prompt.replace("{GROUND_TRUTH}", json.dumps(list(gold)))
    prompt = prompt.replace("{PREDICTION}", prediction)
    return prompt


def parse_verdict(response_text: str) -> str:
    """First alphabetical token, case-insensitive, must be correct/incorrect."""
    m = re.search(r"[A-Za-z]+", response_text)
    token = m.group(0).lower() if m else ""
    if token in ("correct", "incorrect"):
        return token
    raise UnparseableVerdict(response_text[:200])


def request_id(*parts) -> str:
    return hashlib.sha1("|".join(str(p) for p in parts).encode("utf-8")).hexdigest()


class TranscriptLog:
    """Append-only JSONL transcript of request/response pairs, replayable."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._completed: dict[str, dict] = {}
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                for line in f:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    if rec.get("status") == "ok":
                        self._completed[rec["request_id"]] = rec

    def lookup(self, rid: str) -> dict | None:
        return self._completed.get(rid)

    def record(self, rec: dict) -> None:
        with self._lock:
            if rec.get("status") == "ok":
                self._completed[rec["request_id"]] = rec
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(rec, ensure_ascii=False) + "\n")


class InferenceClient:
    """Thread-safe client with bounded concurrency and retrying dispatch."""

    def __init__(self, endpoint: EndpointConfig,
                 transcript: TranscriptLog | None = None,
                 rng: random.Random | None = None):
        self.endpoint = endpoint
        self.transcript = transcript
        self._rng = rng or random.Random()
        self._sem = threading.BoundedSemaphore(endpoint.max_parallel)
        headers = {}
        key = endpoint.resolve_api_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(
            base_url=endpoint.base_url,
            timeout=endpoint.timeout,
            headers=headers,
        )

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- transport ---------------------------------------------------------

    def _post(self, path: str, body: dict, rid: str) -> dict:
        retries = 0
        while True:
            try:
                with self._sem:
                    resp = self._client.post(path, json=body)
            except httpx.TimeoutException as e:
                if retries >= self.endpoint.max_retries:
                    raise Timeout(str(e)) from e
                self._backoff(retries)
                retries += 1
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                if retries >= self.endpoint.max_retries:
                    raise RateLimited(f"HTTP {resp.status_code} after "
                                      f"{retries} retries")
                self._backoff(retries)
                retries += 1
                continue
            if resp.status_code == 400 and "context" in resp.text.lower():
                raise ContextOverflow(resp.text[:200])
            if resp.status_code != 200:
                raise EndpointError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                payload = resp.json()
            except ValueError as e:
                raise MalformedResponse(str(e)) from e
            if retries:
                logger.info("request %s succeeded after %d retries", rid, retries)
            return payload

    def _backoff(self, attempt: int):
        delay = min(self.endpoint.backoff_cap,
                    self.endpoint.backoff_base * (2 ** attempt))
        time.sleep(delay * (0.5 + self._rng.random()))

    # -- operations --------------------------------------------------------

    def sample_completions(self, prompt: str, params: SamplingParams,
                           rid: str | None = None) -> list[str]:
        """Sample n generations for one prompt; replays from the transcript."""
        body = {
            "model": self.endpoint.model_name,
            "messages": [{"role": "user", "content": prompt}],
            **params.to_wire(),
        }
        rid = rid or request_id(self.endpoint.model_name, prompt, params)
        if self.transcript is not None:
            cached = self.transcript.lookup(rid)
            if cached is not None:
                return cached["generations"]
        payload = self._post("/v1/chat/completions", body, rid)
        choices = payload.get("choices")
        if not isinstance(choices, list) or len(choices) != params.n:
            raise MalformedResponse(
                f"expected {params.n} choices, got {choices!r:.200}")
        try:
            ordered = sorted(choices, key=lambda c: c.get("index", 0))
            generations = [c["message"]["content"] for c in ordered]
        except (KeyError, TypeError) as e:
            raise MalformedResponse(str(e)) from e
        if self.transcript is not None:
            self.transcript.record({
                "request_id": rid,
                "status": "ok",
                "model": self.endpoint.model_name,
                "params": params.to_wire(),
                "generations": generations,
                "usage": payload.get("usage"),
            })
        return generations

    def embed(self, texts: list[str], batch_size: int = 64) -> list[EmbeddingVector]:
        if not texts:
            raise ValueError("texts must be non-empty")
        if any(not t for t in texts):
            raise ValueError("every text must be non-empty")
        vectors: list[EmbeddingVector] = []
        for start in range(0, len(texts), batch_size):
            batch = texts[start:start + batch_size]
            body = {"model": self.endpoint.model_name, "input": batch}
            rid = request_id(self.endpoint.model_name, "embed", start, *batch)
            payload = self._post("/v1/embeddings", body, rid)
            data = payload.get("data")
            if not isinstance(data, list) or len(data) != len(batch):
                raise MalformedResponse("embedding count mismatch")
            data = sorted(data, key=lambda d: d.get("index", 0))
            for offset, item in enumerate(data):
                try:
                    values = tuple(float(v) for v in item["embedding"])
                except (KeyError, TypeError) as e:
                    raise MalformedResponse(str(e)) from e
                vectors.append(EmbeddingVector(values=values,
                                               source_id=start + offset))
        dims = {len(v.values) for v in vectors}
        if len(dims) > 1:
            raise DimensionInconsistent(f"dimensions {sorted(dims)}")
        return vectors

    def judge(self, question: str, gold: list[str], prediction: str) -> str:
        """Render the few-shot judge prompt and parse the verdict.

        Decoding is left at the endpoint's defaults (only max_tokens is
        bounded); returns 'correct' or 'incorrect', raises
        UnparseableVerdict otherwise.
        """
        prompt = render_judge_prompt(question, gold, prediction)
        body = {
            "model": self.endpoint.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "max_tokens": 16,
        }
        rid = request_id(self.endpoint.model_name, "judge", question, prediction)
        if self.transcript is not None:
            cached = self.transcript.lookup(rid)
            if cached is not None:
                return parse_verdict(cached["generations"][0])
        payload = self._post("/v1/chat/completions", body, rid)
        try:
            text = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise MalformedResponse(str(e)) from e
        if self.transcript is not None:
            self.transcript.record({
                "request_id": rid,
                "status": "ok",
                "model": self.endpoint.model_name,
                "generations": [text],
            })
        return parse_verdict(text)
