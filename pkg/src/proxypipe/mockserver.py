"""Deterministic in-process mock of the chat/embeddings wire protocol.

Serves canned or rule-based responses over real HTTP so the client,
pipeline, and CLI smoke test run without a live model. Behaviors are plain
callables receiving the request body; helpers below cover scripted
generation, heuristic judging, and deterministic pseudo-embeddings.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .scoring import lenient_match

_JUDGE_BLOCK = re.compile(
    r"Question: (?P<q>.*)\nGround truth: (?P<g>.*)\nPrediction: (?P<p>.*)\nCorrectness:")


def scripted_chat(script: dict[str, list[str]]):
    """Map a prompt-substring key to a fixed list of generations.

    The first key found in the prompt wins; the generation list is cycled
    if the request asks for more samples than scripted.
    """
    def behavior(body: dict) -> list[str]:
        prompt = body["messages"][-1]["content"]
        n = body.get("n", 1)
        for key, gens in script.items():
            if key in prompt:
                return [gens[i % len(gens)] for i in range(n)]
        raise KeyError(f"no script entry matches prompt: {prompt[:120]!r}")
    return behavior


def heuristic_judge(body: dict) -> list[str]:
    """Judge the final prompt block by lenient string matching."""
    prompt = body["messages"][-1]["content"]
    blocks = _JUDGE_BLOCK.findall(prompt)
    if not blocks:
        return ["incorrect"]
    question, gold_json, prediction = blocks[-1]
    try:
        gold = json.loads(gold_json)
    except ValueError:
        gold = [gold_json]
    return ["correct" if lenient_match(gold, prediction) else "incorrect"]


def scripted_judge(verdicts: dict[str, str], default: str = "incorrect"):
    """Judge by looking the prediction of the final block up in a table."""
    def behavior(body: dict) -> list[str]:
        prompt = body["messages"][-1]["content"]
        blocks = _JUDGE_BLOCK.findall(prompt)
        if not blocks:
            return [default]
        prediction = blocks[-1][2]
        return [verdicts.get(prediction, default)]
    return behavior


def hash_embedding(text: str, dim: int = 32) -> list[float]:
    seed = int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")
    rng = random.Random(seed)
    return [rng.uniform(-1.0, 1.0) for _ in range(dim)]


class MockEndpoint:
    """Threaded HTTP server speaking the OpenAI-compatible JSON protocol.

    ``chat_behavior(body) -> list[str]`` supplies generations;
    ``fail_statuses`` is a queue of HTTP statuses returned (and consumed)
    before any request succeeds; ``context_limit_chars`` triggers a 400
    context-length rejection for oversized prompts. The server tracks the
    peak number of concurrently in-flight requests.
    """

    def __init__(self, chat_behavior=None, embed_dim: int = 32,
                 fail_statuses: list[int] | None = None,
                 context_limit_chars: int | None = None,
                 response_delay: float = 0.0):
        self.chat_behavior = chat_behavior or heuristic_judge
        self.embed_dim = embed_dim
        self.fail_statuses = list(fail_statuses or [])
        self.context_limit_chars = context_limit_chars
        self.response_delay = response_delay
        self.requests: list[dict] = []
        self.max_in_flight = 0
        self._in_flight = 0
        self._lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> str:
        endpoint = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                endpoint._handle(self)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        daemon=True)
        self._thread.start()
        return self.base_url

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def stop(self):
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.stop()

    @property
    def n_calls(self) -> int:
        return len(self.requests)

    # -- request handling --------------------------------------------------

    def _handle(self, handler: BaseHTTPRequestHandler):
        with self._lock:
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)
        try:
            length = int(handler.headers.get("Content-Length", 0))
            body = json.loads(handler.rfile.read(length) or b"{}")
            with self._lock:
                self.requests.append({"path": handler.path, "body": body})
                if self.fail_statuses:
                    status = self.fail_statuses.pop(0)
                    self._send(handler, status,
                               {"error": {"message": f"injected {status}"}})
                    return
            if self.response_delay:
                time.sleep(self.response_delay)
            if handler.path.endswith("/chat/completions"):
                self._chat(handler, body)
            elif handler.path.endswith("/embeddings"):
                self._embeddings(handler, body)
            else:
                self._send(handler, 404, {"error": {"message": "unknown path"}})
        finally:
            with self._lock:
                self._in_flight -= 1

    def _chat(self, handler, body):
        content = "".join(m.get("content", "") for m in body.get("messages", []))
        if (self.context_limit_chars is not None
                and len(content) > self.context_limit_chars):
            self._send(handler, 400, {"error": {
                "message": "maximum context length exceeded"}})
            return
        try:
            generations = self.chat_behavior(body)
        except KeyError as e:
            self._send(handler, 422, {"error": {"message": str(e)}})
            return
        choices = [
            {
                "index": i,
                "message": {"role": "assistant", "content": text},
                "finish_reason": "stop",
            }
            for i, text in enumerate(generations)
        ]
        self._send(handler, 200, {
            "id": "mock",
            "object": "chat.completion",
            "model": body.get("model", "mock"),
            "choices": choices,
            "usage": {
                "prompt_tokens": len(content.split()),
                "completion_tokens": sum(len(g.split()) for g in generations),
            },
        })

    def _embeddings(self, handler, body):
        inputs = body.get("input", [])
        if isinstance(inputs, str):
            inputs = [inputs]
        data = [
            {"index": i, "embedding": hash_embedding(text, self.embed_dim)}
            for i, text in enumerate(inputs)
        ]
        self._send(handler, 200, {"object": "list", "data": data,
                                  "model": body.get("model", "mock")})

    @staticmethod
    def _send(handler, status: int, payload: dict):
        raw = json.dumps(payload).encode("utf-8")
        handler.send_response(status)
        handler.send_header("Content-Type", "application/json")
        handler.send_header("Content-Length", str(len(raw)))
        handler.end_headers()
        handler.wfile.write(raw)
