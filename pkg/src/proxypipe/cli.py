"""Command-line interface: one subcommand per pipeline stage.

Configuration comes from an optional JSON file (--config) with flag
overrides; unknown config keys are rejected. Every stage writes a run
manifest next to its outputs and skips work when re-run with an identical
configuration. Exit codes: 0 success, 1 runtime failure, 2 usage error,
3 config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import corpus as corpusmod
from . import evalharness, fixtures, longctx, pipeline, proxies
from .corpus import TokenCounter
from .inference import EndpointConfig, InferenceClient, SamplingParams, TranscriptLog
from .mockserver import MockEndpoint, heuristic_judge, scripted_chat

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3


class ConfigError(Exception):
    pass


_KNOWN_CONFIG_KEYS = {
    "corpus_dir", "out_dir", "counter", "vocab_path", "seed", "parallel",
    "target_tokens", "max_depth", "shuffle_final_order", "proxy_kind",
    "proxy_budget", "noise_ratio", "endpoint_url", "model", "api_key",
    "judge_endpoint_url", "judge_model", "template_path", "marker",
    "sampling", "selection", "retention", "reward_threshold",
}
_KNOWN_SAMPLING_KEYS = {"temperature", "top_p", "top_k", "min_p",
                        "max_tokens", "n"}


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            config = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    unknown = set(config) - _KNOWN_CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    sampling = config.get("sampling", {})
    bad = set(sampling) - _KNOWN_SAMPLING_KEYS
    if bad:
        raise ConfigError(f"unknown sampling keys: {sorted(bad)}")
    return config


def _setting(args, config: dict, name: str, default=None):
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    return config.get(name, default)


def _counter(args, config) -> TokenCounter:
    mode = _setting(args, config, "counter", "whitespace")
    vocab = _setting(args, config, "vocab_path")
    try:
        return TokenCounter(mode=mode, vocab_path=vocab)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _stage_done(out_dir: str, stage: str, config: dict) -> bool:
    """True when the stage manifest exists with an identical config hash."""
    path = os.path.join(out_dir, f"{stage}.manifest.json")
    if not os.path.exists(path):
        return False
    try:
        with open(path, encoding="utf-8") as f:
            manifest = json.load(f)
    except (OSError, ValueError):
        return False
    import hashlib
    blob = json.dumps(config, sort_keys=True).encode("utf-8")
    return manifest.get("config_hash") == hashlib.sha256(blob).hexdigest()


def _write_stage_manifest(out_dir: str, stage: str, config: dict,
                          seed: int = 0, template: str = "",
                          model: str | None = None):
    pipeline.write_manifest(os.path.join(out_dir, f"{stage}.manifest.json"),
                            config, seed, template, model)


def _load_bundles(bundles_dir: str) -> dict[str, corpusmod.ContextBundle]:
    meta = {r["instance_id"]: r for r in pipeline.read_jsonl(
        os.path.join(bundles_dir, "bundles.jsonl"))}
    texts = {r["instance_id"]: r["text"] for r in pipeline.read_jsonl(
        os.path.join(bundles_dir, "contexts.jsonl"))}
    bundles = {}
    for iid, rec in meta.items():
        bundles[iid] = corpusmod.ContextBundle(
            instance_id=iid,
            doc_ids=tuple(rec["doc_ids"]),
            text=texts[iid],
            token_count=rec["token_count"],
            under_budget=rec.get("under_budget", False),
        )
    return bundles


def _write_bundles(bundles: list[corpusmod.ContextBundle], out_dir: str):
    pipeline.write_jsonl(os.path.join(out_dir, "bundles.jsonl"), [
        {
            "instance_id": b.instance_id,
            "doc_ids": list(b.doc_ids),
            "token_count": b.token_count,
            "under_budget": b.under_budget,
        }
        for b in bundles
    ])
    pipeline.write_jsonl(os.path.join(out_dir, "contexts.jsonl"), [
        {"instance_id": b.instance_id, "text": b.text} for b in bundles
    ])


def _proxy_to_record(p: proxies.ProxyContext) -> dict:
    return {
        "instance_id": p.instance_id,
        "kind": p.kind,
        "text": p.text,
        "token_count": p.token_count,
        "noise_ratio": list(p.noise_ratio) if p.noise_ratio else None,
        "provenance": [list(e) if isinstance(e, tuple) else e
                       for e in p.provenance],
        "truncated": p.truncated,
    }


def _proxy_from_record(rec: dict) -> proxies.ProxyContext:
    provenance = tuple(tuple(e) if isinstance(e, list) else e
                       for e in rec.get("provenance", []))
    ratio = rec.get("noise_ratio")
    return proxies.ProxyContext(
        instance_id=rec["instance_id"],
        kind=rec["kind"],
        text=rec["text"],
        token_count=rec["token_count"],
        provenance=provenance,
        noise_ratio=tuple(ratio) if ratio else None,
        truncated=rec.get("truncated", False),
    )


def _load_proxies(path: str) -> dict[str, proxies.ProxyContext]:
    return {r["instance_id"]: _proxy_from_record(r)
            for r in pipeline.read_jsonl(path)}


def _parse_ratio(text: str) -> int:
    parts = text.split(":")
    if len(parts) != 2 or parts[0] != "1" or not parts[1].isdigit():
        raise ConfigError(f"noise ratio must look like '1:k', got {text!r}")
    return int(parts[1])


# ---------------------------------------------------------------------------
# Subcommands


def cmd_ingest(args, config):
    loaded = corpusmod.load_corpus(_setting(args, config, "corpus_dir"))
    out = _setting(args, config, "out_dir")
    os.makedirs(out, exist_ok=True)
    corpusmod.save_corpus(loaded, out)
    _write_stage_manifest(out, "ingest", config)
    print(f"ingest: {len(loaded.documents)} documents, "
          f"{len(loaded.instances)} instances -> {out}")
    return EXIT_OK


def cmd_build_longctx(args, config):
    out = _setting(args, config, "out_dir")
    stage_config = {
        "stage": "build-longctx",
        "corpus_dir": _setting(args, config, "corpus_dir"),
        "target_tokens": _setting(args, config, "target_tokens", 7000),
        "max_depth": _setting(args, config, "max_depth", 2),
        "seed": _setting(args, config, "seed", 0),
        "shuffle": _setting(args, config, "shuffle_final_order", True),
        "counter": _setting(args, config, "counter", "whitespace"),
    }
    os.makedirs(out, exist_ok=True)
    if _stage_done(out, "build-longctx", stage_config):
        print("build-longctx: up to date, skipping")
        return EXIT_OK
    loaded = corpusmod.load_corpus(stage_config["corpus_dir"])
    counter = _counter(args, config)
    cfg = longctx.ExpansionConfig(
        target_tokens=int(stage_config["target_tokens"]),
        max_depth=int(stage_config["max_depth"]),
        seed=int(stage_config["seed"]),
        shuffle_final_order=bool(stage_config["shuffle"]),
    )
    bundles = [longctx.build_long_context(inst, loaded, cfg, counter)
               for inst in loaded.instances]
    _write_bundles(bundles, out)
    _write_stage_manifest(out, "build-longctx", stage_config,
                          seed=cfg.seed)
    print(f"build-longctx: {len(bundles)} bundles -> {out}")
    return EXIT_OK


def cmd_build_proxy(args, config):
    out = _setting(args, config, "out_dir")
    kind = _setting(args, config, "proxy_kind")
    if kind not in proxies.PROXY_KINDS:
        raise ConfigError(f"unknown proxy kind: {kind!r}")
    seed = int(_setting(args, config, "seed", 0))
    budget = int(_setting(args, config, "proxy_budget", 256))
    ratio = _setting(args, config, "noise_ratio")
    stage_config = {
        "stage": "build-proxy",
        "corpus_dir": _setting(args, config, "corpus_dir"),
        "bundles_dir": getattr(args, "bundles", None),
        "kind": kind,
        "seed": seed,
        "budget": budget,
        "ratio": ratio,
        "counter": _setting(args, config, "counter", "whitespace"),
    }
    os.makedirs(out, exist_ok=True)
    stage = f"build-proxy-{kind}"
    if _stage_done(out, stage, stage_config):
        print(f"{stage}: up to date, skipping")
        return EXIT_OK
    loaded = corpusmod.load_corpus(stage_config["corpus_dir"])
    counter = _counter(args, config)
    bundles = (_load_bundles(args.bundles)
               if getattr(args, "bundles", None) else {})

    embed_fn = None
    if kind == "embedding":
        url = _setting(args, config, "endpoint_url")
        if not url:
            raise ConfigError("embedding proxies need --endpoint-url")
        client = InferenceClient(EndpointConfig(
            base_url=url, model_name=_setting(args, config, "model", "embedder")))
        embed_fn = client.embed

    built = []
    for inst in loaded.instances:
        if kind == "annotation":
            built.append(proxies.annotation_proxy(inst, loaded, counter))
        elif kind == "metadata":
            built.append(proxies.metadata_proxy(inst, counter))
        elif kind == "random":
            built.append(proxies.random_proxy(inst, bundles[inst.id], budget,
                                              seed, counter))
        elif kind in ("bm25", "embedding"):
            built.append(proxies.retrieval_proxy(inst, bundles[inst.id], kind,
                                                 budget, counter,
                                                 embed_fn=embed_fn))
        else:  # noisy
            if ratio is None:
                raise ConfigError("noisy proxies need --ratio 1:k")
            oracle = proxies.annotation_proxy(inst, loaded, counter)
            built.append(proxies.noisy_proxy(oracle, bundles[inst.id],
                                             _parse_ratio(ratio), seed, counter))
    out_path = os.path.join(out, f"proxies.{kind}.jsonl")
    pipeline.write_jsonl(out_path, [_proxy_to_record(p) for p in built])
    _write_stage_manifest(out, stage, stage_config, seed=seed)
    print(f"build-proxy: {len(built)} {kind} proxies -> {out_path}")
    return EXIT_OK


def _sampling_params(args, config) -> SamplingParams:
    sampling = dict(config.get("sampling", {}))
    if getattr(args, "n", None) is not None:
        sampling["n"] = args.n
    if getattr(args, "max_tokens", None) is not None:
        sampling["max_tokens"] = args.max_tokens
    defaults = {"temperature": 0.7, "top_p": 0.8, "top_k": 20, "min_p": 0.0,
                "max_tokens": 32768, "n": 3}
    defaults.update(sampling)
    return SamplingParams(**defaults)


def _endpoint(args, config, url_key="endpoint_url",
              model_key="model") -> EndpointConfig:
    url = _setting(args, config, url_key)
    model = _setting(args, config, model_key)
    if not url or not model:
        raise ConfigError(f"an endpoint URL and model name are required "
                          f"({url_key}, {model_key})")
    return EndpointConfig(
        base_url=url,
        model_name=model,
        api_key=_setting(args, config, "api_key"),
        max_parallel=int(_setting(args, config, "parallel", 4)),
    )


def _template(args, config) -> str:
    path = _setting(args, config, "template_path")
    if path:
        with open(path, encoding="utf-8") as f:
            return f.read()
    return pipeline.DEFAULT_PROMPT_TEMPLATE


def cmd_sample_traces(args, config):
    out = _setting(args, config, "out_dir")
    os.makedirs(out, exist_ok=True)
    loaded = corpusmod.load_corpus(_setting(args, config, "corpus_dir"))
    counter = _counter(args, config)
    proxy_map = _load_proxies(args.proxies)
    params = _sampling_params(args, config)
    endpoint = _endpoint(args, config)
    template = _template(args, config)
    marker = _setting(args, config, "marker", "Final Answer:")
    transcript = TranscriptLog(os.path.join(out, "transcript.jsonl"))
    with InferenceClient(endpoint, transcript=transcript) as client:
        result = pipeline.acquire_traces(
            loaded.instances, proxy_map, client, params, counter,
            template=template, marker=marker,
            retention=_setting(args, config, "retention", "em"),
            reward_threshold=float(
                _setting(args, config, "reward_threshold", 2.0)),
        )
    pipeline.write_jsonl(os.path.join(out, "traces.jsonl"),
                         [pipeline.trace_to_record(t) for t in result.traces])
    pipeline.write_jsonl(os.path.join(out, "rejects.jsonl"),
                         [{"instance_id": i} for i in result.rejects])
    stage_config = {"stage": "sample-traces", "endpoint": endpoint.base_url}
    _write_stage_manifest(out, "sample-traces", stage_config,
                          template=template, model=endpoint.model_name)
    print(f"sample-traces: retained {len(result.traces)} traces, "
          f"{len(result.rejects)} rejects, "
          f"{result.extraction_failures} extraction failures -> {out}")
    return EXIT_OK


def cmd_assemble_sft(args, config):
    out = _setting(args, config, "out_dir")
    os.makedirs(out, exist_ok=True)
    loaded = corpusmod.load_corpus(_setting(args, config, "corpus_dir"))
    bundles = _load_bundles(args.bundles)
    traces = [pipeline.trace_from_record(r)
              for r in pipeline.read_jsonl(args.traces)]
    records = pipeline.assemble_sft(
        traces, bundles, {i.id: i for i in loaded.instances},
        selection=_setting(args, config, "selection", "all"),
        seed=int(_setting(args, config, "seed", 0)),
    )
    pipeline.write_jsonl(os.path.join(out, "sft.jsonl"),
                         [pipeline.sft_to_record(r) for r in records])
    _write_stage_manifest(out, "assemble-sft",
                          {"stage": "assemble-sft",
                           "selection": _setting(args, config, "selection", "all")},
                          seed=int(_setting(args, config, "seed", 0)))
    print(f"assemble-sft: {len(records)} records -> {out}")
    return EXIT_OK


def cmd_stats(args, config):
    loaded = corpusmod.load_corpus(_setting(args, config, "corpus_dir"))
    counter = _counter(args, config)
    bundles = _load_bundles(args.bundles) if args.bundles else {}
    proxy_map = _load_proxies(args.proxies) if args.proxies else {}
    stats = pipeline.dataset_stats(loaded.instances, bundles, proxy_map, counter)
    print(json.dumps(stats.__dict__, indent=2))
    return EXIT_OK


def _load_predictions(path: str) -> dict[str, str]:
    return {r["instance_id"]: r["generation"]
            for r in pipeline.read_jsonl(path)}


def cmd_evaluate(args, config):
    loaded = corpusmod.load_corpus(_setting(args, config, "corpus_dir"))
    counter = _counter(args, config)
    predictions = _load_predictions(args.predictions)
    report = evalharness.evaluate_metric(
        loaded.instances, predictions, counter,
        marker=_setting(args, config, "marker", "Final Answer:"))
    payload = evalharness.report_to_dict(report)
    report_path = _setting(args, config, "out_dir")
    if report_path:
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    print(json.dumps({k: v for k, v in payload.items() if k != "per_instance"},
                     indent=2))
    return EXIT_OK


def cmd_judge(args, config):
    loaded = corpusmod.load_corpus(_setting(args, config, "corpus_dir"))
    counter = _counter(args, config)
    predictions = _load_predictions(args.predictions)
    endpoint = _endpoint(args, config, url_key="judge_endpoint_url",
                         model_key="judge_model")
    with InferenceClient(endpoint) as client:
        report = evalharness.evaluate_judged(loaded.instances, predictions,
                                             client, counter)
    payload = evalharness.report_to_dict(report)
    report_path = _setting(args, config, "out_dir")
    if report_path:
        with open(report_path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    print(json.dumps({k: v for k, v in payload.items() if k != "per_instance"},
                     indent=2))
    return EXIT_OK


def cmd_smoke(args, config):
    """Full pipeline against the bundled fixture corpus and mock endpoint."""
    out = _setting(args, config, "out_dir") or "smoke-out"
    os.makedirs(out, exist_ok=True)
    demo = fixtures.build_demo_corpus()
    corpus_dir = os.path.join(out, "corpus")
    corpusmod.save_corpus(demo, corpus_dir)
    loaded = corpusmod.load_corpus(corpus_dir)
    counter = TokenCounter(mode="whitespace")

    failures = []

    def check(name, got, want):
        status = "ok" if got == want else "FAIL"
        print(f"smoke {name}: {got} (expected {want}) [{status}]")
        if got != want:
            failures.append(name)

    check("instances", len(loaded.instances), fixtures.EXPECTED_SMOKE["instances"])

    cfg = longctx.ExpansionConfig(target_tokens=fixtures.TARGET_TOKENS, seed=7)
    bundles = {inst.id: longctx.build_long_context(inst, loaded, cfg, counter)
               for inst in loaded.instances}
    bundles_dir = os.path.join(out, "bundles")
    os.makedirs(bundles_dir, exist_ok=True)
    _write_bundles(list(bundles.values()), bundles_dir)
    check("bundles", len(bundles), fixtures.EXPECTED_SMOKE["bundles"])

    annotation = {inst.id: proxies.annotation_proxy(inst, loaded, counter)
                  for inst in loaded.instances}
    noisy = {iid: proxies.noisy_proxy(p, bundles[iid], 2, 7, counter)
             for iid, p in annotation.items()}
    pipeline.write_jsonl(os.path.join(out, "proxies.annotation.jsonl"),
                         [_proxy_to_record(p) for p in annotation.values()])
    pipeline.write_jsonl(os.path.join(out, "proxies.noisy.jsonl"),
                         [_proxy_to_record(p) for p in noisy.values()])
    check("proxies", len(annotation), fixtures.EXPECTED_SMOKE["proxies"])

    with MockEndpoint(chat_behavior=scripted_chat(
            fixtures.smoke_script(loaded))) as mock:
        endpoint = EndpointConfig(base_url=mock.base_url, model_name="mock-model",
                                  max_parallel=int(_setting(args, config,
                                                            "parallel", 4)))
        transcript = TranscriptLog(os.path.join(out, "transcript.jsonl"))
        with InferenceClient(endpoint, transcript=transcript) as client:
            result = pipeline.acquire_traces(
                loaded.instances, annotation, client,
                SamplingParams(n=3, max_tokens=2048), counter)
    check("retained_traces", len(result.traces),
          fixtures.EXPECTED_SMOKE["retained_traces"])
    check("rejects", len(result.rejects), fixtures.EXPECTED_SMOKE["rejects"])
    check("extraction_failures", result.extraction_failures,
          fixtures.EXPECTED_SMOKE["extraction_failures"])
    pipeline.write_jsonl(os.path.join(out, "traces.jsonl"),
                         [pipeline.trace_to_record(t) for t in result.traces])

    records = pipeline.assemble_sft(result.traces, bundles,
                                    {i.id: i for i in loaded.instances})
    pipeline.write_jsonl(os.path.join(out, "sft.jsonl"),
                         [pipeline.sft_to_record(r) for r in records])
    check("sft_records", len(records), fixtures.EXPECTED_SMOKE["sft_records"])

    report = evalharness.evaluate_metric(
        loaded.instances, fixtures.smoke_predictions(loaded), counter)
    with open(os.path.join(out, "report.json"), "w", encoding="utf-8") as f:
        json.dump(evalharness.report_to_dict(report), f, indent=2)
        f.write("\n")
    check("em_mean", report.em_mean, fixtures.EXPECTED_SMOKE["em_mean"])
    check("f1_mean", report.f1_mean, fixtures.EXPECTED_SMOKE["f1_mean"])

    stats = pipeline.dataset_stats(loaded.instances, bundles, annotation, counter)
    print(f"smoke proxy/full token ratio: {stats.proxy_to_full_ratio:.4f}")

    _write_stage_manifest(out, "smoke", {"stage": "smoke"}, seed=7)
    if failures:
        print(f"smoke: FAILED checks: {failures}", file=sys.stderr)
        return EXIT_RUNTIME
    print("smoke: all checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxypipe",
        description="Long-context QA data pipeline: contexts, proxies, "
                    "traces, SFT records, evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--counter", choices=["whitespace", "chars-over-4",
                                             "external-vocab"])
        p.add_argument("--vocab-path")
        p.add_argument("--out", dest="out_dir")
        p.add_argument("--parallel", type=int)
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("ingest", help="validate and normalize a corpus")
    common(p)
    p.add_argument("--corpus", dest="corpus_dir")

    p = sub.add_parser("build-longctx", help="build budgeted full contexts")
    common(p)
    p.add_argument("--corpus", dest="corpus_dir")
    p.add_argument("--target-tokens", dest="target_tokens", type=int)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--no-shuffle", dest="shuffle_final_order",
                   action="store_false", default=None)

    p = sub.add_parser("build-proxy", help="construct proxy contexts")
    common(p)
    p.add_argument("--corpus", dest="corpus_dir")
    p.add_argument("--bundles", help="bundle directory (for context pools)")
    p.add_argument("--kind", dest="proxy_kind")
    p.add_argument("--budget", dest="proxy_budget", type=int)
    p.add_argument("--ratio", dest="noise_ratio")
    p.add_argument("--endpoint-url", dest="endpoint_url")
    p.add_argument("--model", dest="model")

    p = sub.add_parser("sample-traces",
                       help="acquire correctness-filtered reasoning traces")
    common(p)
    p.add_argument("--corpus", dest="corpus_dir")
    p.add_argument("--proxies", required=True)
    p.add_argument("--endpoint-url", dest="endpoint_url")
    p.add_argument("--model", dest="model")
    p.add_argument("--n", type=int)
    p.add_argument("--max-tokens", dest="max_tokens", type=int)
    p.add_argument("--template", dest="template_path")

    p = sub.add_parser("assemble-sft", help="emit grounding-swap SFT records")
    common(p)
    p.add_argument("--corpus", dest="corpus_dir")
    p.add_argument("--bundles", required=True)
    p.add_argument("--traces", required=True)
    p.add_argument("--selection", choices=["all", "one_per_instance"])

    p = sub.add_parser("stats", help="dataset token statistics")
    common(p)
    p.add_argument("--corpus", dest="corpus_dir")
    p.add_argument("--bundles")
    p.add_argument("--proxies")

    p = sub.add_parser("evaluate", help="EM/F1 evaluation of predictions")
    common(p)
    p.add_argument("--corpus", dest="corpus_dir")
    p.add_argument("--predictions", required=True)

    p = sub.add_parser("judge", help="model-as-judge evaluation")
    common(p)
    p.add_argument("--corpus", dest="corpus_dir")
    p.add_argument("--predictions", required=True)
    p.add_argument("--endpoint-url", dest="judge_endpoint_url")
    p.add_argument("--model", dest="judge_model")

    p = sub.add_parser("smoke",
                       help="end-to-end run on the bundled fixture + mock")
    common(p)

    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "build-longctx": cmd_build_longctx,
    "build-proxy": cmd_build_proxy,
    "sample-traces": cmd_sample_traces,
    "assemble-sft": cmd_assemble_sft,
    "stats": cmd_stats,
    "evaluate": cmd_evaluate,
    "judge": cmd_judge,
    "smoke": cmd_smoke,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(getattr(args, "config", None))
        return _COMMANDS[args.command](args, config)
    except ConfigError as e:
        print(f"error: config: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - single CLI failure funnel
        logger.debug("failure", exc_info=True)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
