"""Stage orchestration: trace acquisition, SFT assembly, dataset statistics.

Stage 1 samples reasoning traces on proxy contexts and keeps only traces
whose extracted answer re-scores as correct. Stage 2 swaps the grounding:
each retained trace is paired with the instance's FULL context (never the
proxy) in the exported training record.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

from .corpus import ContextBundle, QaInstance, TokenCounter
from .inference import (
    ContextOverflow,
    EndpointError,
    InferenceClient,
    SamplingParams,
    request_id,
)
from .proxies import ProxyContext
from .scoring import (
    DEFAULT_ANSWER_MARKER,
    NoAnswerFound,
    exact_match,
    extract_answer,
    token_f1,
)

logger = logging.getLogger(__name__)

DEFAULT_PROMPT_TEMPLATE = (
    "Answer the question using the provided context.\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Reason step by step, then give your final answer on its own line in the "
    "form 'Final Answer: <answer>'."
)

_PLACEHOLDER = re.compile(r"\{question\}|\{context\}")


class PipelineError(Exception):
    pass


class MissingPlaceholder(PipelineError):
    pass


class MissingBundle(PipelineError):
    def __init__(self, instance_id: str):
        super().__init__(f"no full-context bundle for instance {instance_id!r}")
        self.instance_id = instance_id


def render_prompt(template: str, question: str, context_text: str) -> str:
    """Pure substitution of {question} and {context}, each required once.

    Braces inside the substituted values are never re-interpreted.
    """
    found = _PLACEHOLDER.findall(template)
    for name in ("{question}", "{context}"):
        if found.count(name) != 1:
            raise MissingPlaceholder(
                f"template must contain {name} exactly once "
                f"(found {found.count(name)})")
    parts = _PLACEHOLDER.split(template)
    slots = iter(found)
    out = [parts[0]]
    for part in parts[1:]:
        slot = next(slots)
        out.append(question if slot == "{question}" else context_text)
        out.append(part)
    return "".join(out)


@dataclass(frozen=True)
class ReasoningTrace:
    instance_id: str
    proxy_kind: str
    text: str
    extracted_answer: str
    reward: float
    em: int
    sampling: SamplingParams
    attempt: int
    cot_token_count: int


@dataclass(frozen=True)
class SftRecord:
    instance_id: str
    question: str
    context_text: str
    trace_text: str
    answer: str
    source_proxy_kind: str


@dataclass
class AcquisitionResult:
    traces: list[ReasoningTrace] = field(default_factory=list)
    rejects: list[str] = field(default_factory=list)  # instance ids, 0 retained
    extraction_failures: int = 0
    skipped: list[str] = field(default_factory=list)  # context overflow etc.
    retained_per_instance: dict[str, int] = field(default_factory=dict)


def acquire_traces(instances: list[QaInstance],
                   proxies: dict[str, ProxyContext],
                   client: InferenceClient,
                   params: SamplingParams,
                   counter: TokenCounter,
                   template: str = DEFAULT_PROMPT_TEMPLATE,
                   marker: str = DEFAULT_ANSWER_MARKER,
                   retention: str = "em",
                   reward_threshold: float = 2.0,
                   max_workers: int | None = None) -> AcquisitionResult:
    """Sample n traces per instance on its proxy and keep the correct ones.

    Retention: 'em' keeps traces whose extracted answer scores EM = 1
    against the gold answers (the default, strict reading of answer
    correctness); 'reward' keeps traces with reward >= reward_threshold for
    free-form answers. Generations without the answer marker are dropped
    and counted as extraction failures. Instances with zero retained traces
    land in ``rejects``. Request ids are deterministic so re-runs against a
    transcript perform no duplicate endpoint calls.
    """
    if retention not in ("em", "reward"):
        raise ValueError(f"unknown retention rule: {retention}")

    result = AcquisitionResult()

    def work(inst: QaInstance):
        proxy = proxies[inst.id]
        prompt = render_prompt(template, inst.question, proxy.text)
        rid = request_id(inst.id, 0, hashlib.sha1(prompt.encode()).hexdigest())
        try:
            generations = client.sample_completions(prompt, params, rid=rid)
        except ContextOverflow:
            return inst, "overflow", []
        return inst, "ok", generations

    ordered = sorted(instances, key=lambda i: i.id)
    for inst in ordered:
        if inst.id not in proxies:
            raise PipelineError(f"no proxy for instance {inst.id!r}")

    workers = max_workers or client.endpoint.max_parallel
    with ThreadPoolExecutor(max_workers=workers) as pool:
        outcomes = list(pool.map(work, ordered))

    for inst, status, generations in outcomes:
        if status == "overflow":
            logger.warning("instance %s skipped: context overflow", inst.id)
            result.skipped.append(inst.id)
            continue
        gold = list(inst.answers)
        retained_here = 0
        for attempt, text in enumerate(generations):
            try:
                answer = extract_answer(text, marker)
            except NoAnswerFound:
                result.extraction_failures += 1
                continue
            em = exact_match(gold, answer)
            rew = token_f1(gold, answer) + em
            keep = em == 1 if retention == "em" else rew >= reward_threshold
            if not keep:
                continue
            cot = text[:text.rfind(marker)]
            result.traces.append(ReasoningTrace(
                instance_id=inst.id,
                proxy_kind=proxies[inst.id].kind,
                text=text,
                extracted_answer=answer,
                reward=rew,
                em=em,
                sampling=params,
                attempt=attempt,
                cot_token_count=counter.count(cot),
            ))
            retained_here += 1
        result.retained_per_instance[inst.id] = retained_here
        if retained_here == 0:
            result.rejects.append(inst.id)
    return result


def assemble_sft(traces: list[ReasoningTrace],
                 bundles: dict[str, ContextBundle],
                 instances: dict[str, QaInstance],
                 selection: str = "all",
                 seed: int = 0) -> list[SftRecord]:
    """Pair each retained trace with the FULL context of its instance."""
    if selection not in ("all", "one_per_instance"):
        raise ValueError(f"unknown selection mode: {selection}")
    by_instance: dict[str, list[ReasoningTrace]] = {}
    for trace in traces:
        if trace.instance_id not in bundles:
            raise MissingBundle(trace.instance_id)
        by_instance.setdefault(trace.instance_id, []).append(trace)

    records = []
    for inst_id in sorted(by_instance):
        group = by_instance[inst_id]
        if selection == "one_per_instance":
            rng = random.Random(f"{seed}:{inst_id}")
            group = [group[rng.randrange(len(group))]]
        bundle = bundles[inst_id]
        inst = instances[inst_id]
        for trace in group:
            records.append(SftRecord(
                instance_id=inst_id,
                question=inst.question,
                context_text=bundle.text,
                trace_text=trace.text,
                answer=trace.extracted_answer,
                source_proxy_kind=trace.proxy_kind,
            ))
    return records


@dataclass(frozen=True)
class DatasetStats:
    n_instances: int
    full_context_tokens_mean: float | None
    proxy_tokens_mean: float | None
    question_tokens_mean: float | None
    answer_tokens_mean: float | None
    proxy_to_full_ratio: float | None
    counter_mode: str


def dataset_stats(instances: list[QaInstance],
                  bundles: dict[str, ContextBundle],
                  proxies: dict[str, ProxyContext],
                  counter: TokenCounter) -> DatasetStats:
    """Mean token counts of full contexts, proxies, questions, and answers."""
    if not instances:
        return DatasetStats(0, None, None, None, None, None, counter.mode)
    full = [bundles[i.id].token_count for i in instances if i.id in bundles]
    proxy = [proxies[i.id].token_count for i in instances if i.id in proxies]
    questions = [counter.count(i.question) for i in instances]
    answers = [statistics.mean(counter.count(a) for a in i.answers)
               for i in instances]
    full_mean = statistics.mean(full) if full else None
    proxy_mean = statistics.mean(proxy) if proxy else None
    ratio = (proxy_mean / full_mean
             if full_mean and proxy_mean is not None else None)
    return DatasetStats(
        n_instances=len(instances),
        full_context_tokens_mean=full_mean,
        proxy_tokens_mean=proxy_mean,
        question_tokens_mean=statistics.mean(questions),
        answer_tokens_mean=statistics.mean(answers),
        proxy_to_full_ratio=ratio,
        counter_mode=counter.mode,
    )


# ---------------------------------------------------------------------------
# Serialization

def trace_to_record(trace: ReasoningTrace) -> dict:
    rec = asdict(trace)
    rec["sampling"] = asdict(trace.sampling)
    return rec


def trace_from_record(rec: dict) -> ReasoningTrace:
    rec = dict(rec)
    rec["sampling"] = SamplingParams(**rec["sampling"])
    return ReasoningTrace(**rec)


def sft_to_record(record: SftRecord, system_prompt: str | None = None) -> dict:
    """Raw fields plus a messages-style view for external trainers."""
    rec = asdict(record)
    messages = []
    if system_prompt:
        messages.append({"role": "system", "content": system_prompt})
    messages.append({
        "role": "user",
        "content": render_prompt(DEFAULT_PROMPT_TEMPLATE, record.question,
                                 record.context_text),
    })
    messages.append({"role": "assistant", "content": record.trace_text})
    rec["messages"] = messages
    return rec


def write_jsonl(path: str, records: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")


def read_jsonl(path: str) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                out.append(json.loads(line))
    return out


def write_manifest(path: str, config: dict, seed: int, template: str,
                   model_name: str | None) -> dict:
    """Record everything needed to reproduce an output file."""
    blob = json.dumps(config, sort_keys=True).encode("utf-8")
    manifest = {
        "config_hash": hashlib.sha256(blob).hexdigest(),
        "template_hash": hashlib.sha256(template.encode("utf-8")).hexdigest(),
        "seed": seed,
        "model": model_name,
        "created_unix": int(time.time()),
        "config": config,
        "notes": {"trace_dedup": "none"},
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest
