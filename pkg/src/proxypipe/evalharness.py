"""Evaluation of model predictions: EM/F1 aggregation, judged accuracy,
and chain-of-thought token budget accounting."""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .corpus import QaInstance, TokenCounter
from .inference import EndpointError, InferenceClient, UnparseableVerdict
from .scoring import (
    DEFAULT_ANSWER_MARKER,
    NoAnswerFound,
    exact_match,
    extract_answer,
    token_f1,
)

logger = logging.getLogger(__name__)


@dataclass
class PerInstance:
    instance_id: str
    em: int = 0
    f1: float = 0.0
    verdict: str | None = None  # correct / incorrect / unparseable / unscored
    cot_tokens: int = 0
    missing: bool = False
    extraction_failed: bool = False


@dataclass
class EvalReport:
    dataset_id: str
    context_mode: str  # proxy | full
    n_instances: int
    em_mean: float
    f1_mean: float
    judged_accuracy: float | None = None
    unparseable_verdicts: int = 0
    unscored: int = 0
    cot_tokens_mean: float = 0.0
    missing_predictions: int = 0
    extraction_failures: int = 0
    counter_mode: str = "whitespace"
    per_instance: list[PerInstance] = field(default_factory=list)


def _score_rows(instances, predictions, counter, marker):
    rows = []
    for inst in sorted(instances, key=lambda i: i.id):
        row = PerInstance(instance_id=inst.id)
        generation = predictions.get(inst.id)
        if generation is None:
            row.missing = True
            rows.append(row)
            continue
        row.cot_tokens = cot_region_tokens(generation, counter, marker)[0]
        try:
            answer = extract_answer(generation, marker)
        except NoAnswerFound:
            row.extraction_failed = True
            rows.append(row)
            continue
        gold = list(inst.answers)
        row.em = exact_match(gold, answer)
        row.f1 = token_f1(gold, answer)
        rows.append(row)
    return rows


def _base_report(dataset_id, context_mode, rows, counter):
    n = len(rows)
    return EvalReport(
        dataset_id=dataset_id,
        context_mode=context_mode,
        n_instances=n,
        em_mean=100.0 * sum(r.em for r in rows) / n if n else 0.0,
        f1_mean=100.0 * sum(r.f1 for r in rows) / n if n else 0.0,
        cot_tokens_mean=(sum(r.cot_tokens for r in rows) / n) if n else 0.0,
        missing_predictions=sum(r.missing for r in rows),
        extraction_failures=sum(r.extraction_failed for r in rows),
        counter_mode=counter.mode,
        per_instance=rows,
    )


def evaluate_metric(instances: list[QaInstance],
                    predictions: dict[str, str],
                    counter: TokenCounter,
                    dataset_id: str = "dataset",
                    context_mode: str = "full",
                    marker: str = DEFAULT_ANSWER_MARKER) -> EvalReport:
    """EM/F1 over extracted answers; missing or marker-less predictions
    score 0 and are flagged."""
    rows = _score_rows(instances, predictions, counter, marker)
    return _base_report(dataset_id, context_mode, rows, counter)


def evaluate_judged(instances: list[QaInstance],
                    predictions: dict[str, str],
                    client: InferenceClient,
                    counter: TokenCounter,
                    dataset_id: str = "dataset",
                    context_mode: str = "full",
                    marker: str = DEFAULT_ANSWER_MARKER,
                    max_workers: int | None = None) -> EvalReport:
    """One judge call per instance; unparseable verdicts count as incorrect
    but are reported separately, endpoint failures leave instances unscored.
    The accuracy denominator is always the full instance count."""
    rows = _score_rows(instances, predictions, counter, marker)
    by_id = {r.instance_id: r for r in rows}
    inst_by_id = {i.id: i for i in instances}

    def judge_one(row: PerInstance):
        inst = inst_by_id[row.instance_id]
        generation = predictions.get(inst.id)
        if generation is None:
            row.verdict = "incorrect"
            return
        try:
            answer = extract_answer(generation, marker)
        except NoAnswerFound:
            answer = generation.strip()
        try:
            row.verdict = client.judge(inst.question, list(inst.answers), answer)
        except UnparseableVerdict:
            row.verdict = "unparseable"
        except EndpointError as e:
            logger.warning("judge failed for %s: %s", inst.id, e)
            row.verdict = "unscored"

    workers = max_workers or client.endpoint.max_parallel
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(judge_one, rows))

    report = _base_report(dataset_id, context_mode, rows, counter)
    n = len(rows)
    correct = sum(r.verdict == "correct" for r in rows)
    report.judged_accuracy = 100.0 * correct / n if n else None
    report.unparseable_verdicts = sum(r.verdict == "unparseable" for r in rows)
    report.unscored = sum(r.verdict == "unscored" for r in rows)
    return report


def cot_region_tokens(generation: str, counter: TokenCounter,
                      marker: str = DEFAULT_ANSWER_MARKER) -> tuple[int, bool]:
    """Token count of the text before the final-answer marker.

    Generations without the marker are counted whole; the second element
    flags that case.
    """
    idx = generation.rfind(marker)
    if idx < 0:
        return counter.count(generation), True
    return counter.count(generation[:idx]), False


@dataclass(frozen=True)
class CotBudget:
    mean: float
    median: float
    max: int
    n: int
    missing_marker: int


def cot_budget(generations: list[str], counter: TokenCounter,
               marker: str = DEFAULT_ANSWER_MARKER) -> CotBudget:
    if not generations:
        return CotBudget(mean=0.0, median=0.0, max=0, n=0, missing_marker=0)
    counts = []
    missing = 0
    for g in generations:
        c, flagged = cot_region_tokens(g, counter, marker)
        counts.append(c)
        missing += flagged
    return CotBudget(
        mean=statistics.mean(counts),
        median=statistics.median(counts),
        max=max(counts),
        n=len(counts),
        missing_marker=missing,
    )


def report_to_dict(report: EvalReport) -> dict:
    return {
        "dataset_id": report.dataset_id,
        "context_mode": report.context_mode,
        "n_instances": report.n_instances,
        "em_mean": report.em_mean,
        "f1_mean": report.f1_mean,
        "judged_accuracy": report.judged_accuracy,
        "unparseable_verdicts": report.unparseable_verdicts,
        "unscored": report.unscored,
        "cot_tokens_mean": report.cot_tokens_mean,
        "missing_predictions": report.missing_predictions,
        "extraction_failures": report.extraction_failures,
        "counter_mode": report.counter_mode,
        "per_instance": [
            {
                "instance_id": r.instance_id,
                "em": r.em,
                "f1": r.f1,
                "verdict": r.verdict,
                "cot_tokens": r.cot_tokens,
            }
            for r in report.per_instance
        ],
    }
