"""Command-line front end.

Exit codes: 0 success, 1 usage or validation failure, 2 endpoint or
transport failure.  Endpoint settings resolve as flags, then environment
(POLARITY_ENDPOINT / POLARITY_API_KEY), then --config file, then defaults.
Commands that write an output file also write a `<output>.manifest.json`
recording input/output digests, the resolved settings hash, and the seed
when one applies.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .corpus import DatasetError, load_dataset, save_dataset, split_dataset
from .curation import CurationError, CurationStore, create_app
from .evaluate import EvalReport, compare_runs, render_report, score
from .labels import PolarityLabel
from .lexlabel import LexiconError, label_corpus, load_lexicon, starter_lexicon
from .llmclient import (
    ENV_API_KEY,
    ENV_ENDPOINT,
    EndpointConfig,
    EndpointError,
    FailedOutcome,
    RunMode,
    TranscriptWriter,
    TransportError,
    classify,
    classify_batch,
)
from .loracalc import LoraSpec, bundled_arch, bundled_arch_names, compare_to_published, load_arch, lora_param_breakdown
from .prompts import PromptError, export_training_file
from .textnorm import CleanConfig, clean_text, load_respell_map, script_profile
from .thinkparse import ClassificationOutcome

PROG = "khpolarity"


class _Parser(argparse.ArgumentParser):
    # usage mistakes are validation failures, and those exit 1 here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _config_hash(settings: dict) -> str:
    canon = json.dumps(settings, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def write_manifest(command: str, settings: dict, inputs: list[Path], outputs: list[Path],
                   seed: int | None = None, manifest_path: Path | None = None) -> Path:
    """Reproducibility sidecar for a command run that produced files."""
    manifest = {
        "command": command,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": seed,
        "config_hash": _config_hash(settings),
        "settings": settings,
        "inputs": {str(p): _sha256(p) for p in inputs if p.exists()},
        "outputs": {str(p): _sha256(p) for p in outputs if p.exists()},
    }
    path = manifest_path or Path(str(outputs[0]) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        raise DatasetError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetError(f"config file is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise DatasetError("config file must hold a JSON object")
    return data


def resolve_endpoint(args, file_cfg: dict) -> EndpointConfig:
    """flags > environment > config file > defaults."""
    def pick(flag_value, env_name, file_key, default):
        if flag_value is not None:
            return flag_value
        if env_name and os.environ.get(env_name):
            return os.environ[env_name]
        if file_key in file_cfg:
            return file_cfg[file_key]
        return default

    base_url = pick(getattr(args, "endpoint", None), ENV_ENDPOINT, "endpoint", None)
    if not base_url:
        raise DatasetError(f"no endpoint configured: pass --endpoint, set {ENV_ENDPOINT}, or use --config")
    return EndpointConfig(
        base_url=base_url,
        model_name=pick(getattr(args, "model", None), None, "model", ""),
        api_key=pick(getattr(args, "api_key", None), ENV_API_KEY, "api_key", None),
        temperature=float(pick(getattr(args, "temperature", None), None, "temperature", 0.0)),
        max_new_tokens=int(pick(getattr(args, "max_new_tokens", None), None, "max_new_tokens", 256)),
        request_timeout=float(pick(getattr(args, "timeout", None), None, "timeout", 60.0)),
        max_retries=int(pick(getattr(args, "retries", None), None, "retries", 2)),
        max_in_flight=int(pick(getattr(args, "max_in_flight", None), None, "max_in_flight", 4)),
    )


def _endpoint_settings(cfg: EndpointConfig, mode: str) -> dict:
    settings = {k: v for k, v in cfg.__dict__.items() if k != "api_key"}
    settings["api_key_set"] = cfg.api_key is not None
    settings["mode"] = mode
    return settings


# -- subcommand handlers --------------------------------------------------


def cmd_ingest(args) -> int:
    ds = load_dataset(args.input, format=args.format, name=args.name)
    out = Path(args.output)
    save_dataset(ds, out)
    write_manifest("ingest", {"format": args.format, "name": ds.name}, [Path(args.input)],
                   [out], manifest_path=_mpath(args))
    labeled = sum(1 for r in ds.records if r.label is not None)
    print(f"ingested {len(ds.records)} records ({labeled} labeled) -> {out}")
    return 0


def cmd_clean(args) -> int:
    ds = load_dataset(args.input)
    respell = load_respell_map(args.respell_map) if args.respell_map else {}
    cfg = CleanConfig(
        lowercase_latin=not args.keep_case,
        strip_punctuation=not args.keep_punctuation,
        strip_emoji=not args.keep_emoji,
        strip_symbols=not args.keep_symbols,
        respell_map=respell,
    )
    counts: dict[str, int] = {}
    for rec in ds.records:
        rec.text = clean_text(rec.text, cfg)
        klass = script_profile(rec.text).classification.value
        counts[klass] = counts.get(klass, 0) + 1
    ds.metadata["cleaned"] = True
    out = Path(args.output)
    save_dataset(ds, out)
    settings = {"respell_map": args.respell_map, "lowercase_latin": cfg.lowercase_latin,
                "strip_punctuation": cfg.strip_punctuation, "strip_emoji": cfg.strip_emoji,
                "strip_symbols": cfg.strip_symbols}
    write_manifest("clean", settings, [Path(args.input)], [out], manifest_path=_mpath(args))
    profile = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    print(f"cleaned {len(ds.records)} records ({profile}) -> {out}")
    return 0


def cmd_autolabel(args) -> int:
    ds = load_dataset(args.input)
    lexicon = load_lexicon(args.lexicon) if args.lexicon else starter_lexicon()
    labeled = label_corpus(ds, lexicon)
    out = Path(args.output)
    save_dataset(labeled, out)
    write_manifest("autolabel", {"lexicon": args.lexicon or "starter"}, [Path(args.input)],
                   [out], manifest_path=_mpath(args))
    counts = {label.value: 0 for label in PolarityLabel}
    matched = 0
    for rec in labeled.records:
        counts[rec.provisional_label.value] += 1
        if rec.rationale_matches:
            matched += 1
    dist = ", ".join(f"{k}={v}" for k, v in counts.items())
    print(f"auto-labeled {len(labeled.records)} records ({dist}; {matched} with rationale) -> {out}")
    return 0


def cmd_split(args) -> int:
    ds = load_dataset(args.input)
    train, test = split_dataset(ds, args.test_fraction, args.seed)
    out_train, out_test = Path(args.output_train), Path(args.output_test)
    save_dataset(train, out_train)
    save_dataset(test, out_test)
    write_manifest("split", {"test_fraction": args.test_fraction}, [Path(args.input)],
                   [out_train, out_test], seed=args.seed, manifest_path=_mpath(args))
    print(f"split {len(ds.records)} -> train {len(train.records)} ({out_train}), "
          f"test {len(test.records)} ({out_test})")
    return 0


def cmd_serve_curation(args) -> int:
    import uvicorn

    log = Path(args.log)
    snapshot = Path(args.snapshot) if args.snapshot else Path(str(log) + ".queue.jsonl")
    store = CurationStore(log, snapshot, lease_seconds=args.lease_seconds)
    if args.queue:
        summary = store.enqueue(load_dataset(args.queue))
        print(f"enqueued {summary['added']} new items ({summary['pending']} pending of {summary['total']})")
    ui_dir = args.ui or _default_ui_dir()
    app = create_app(store, ui_dir=ui_dir)
    print(f"curation service on http://{args.host}:{args.port}/ (log: {log})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _default_ui_dir() -> str | None:
    # the browser UI is a sibling package; serve its build when present
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


def cmd_export_train(args) -> int:
    ds = load_dataset(args.input)
    out = Path(args.output)
    summary = export_training_file(ds, out)
    write_manifest("export-train", {"recipe": summary.recipe.to_dict()}, [Path(args.input)],
                   [out], manifest_path=_mpath(args))
    print(f"exported {summary.reasoning_count + summary.non_reasoning_count} conversations "
          f"({summary.reasoning_count} with reasoning, {summary.non_reasoning_count} without) -> {out}")
    return 0


_MODES = {"thinking": RunMode.THINKING, "non-thinking": RunMode.NON_THINKING, "zero-shot": RunMode.ZERO_SHOT}


def _outcome_row(rec_id: str, text: str, outcome) -> dict:
    row = {"id": rec_id, "text": text}
    if isinstance(outcome, FailedOutcome):
        row.update({"label": None, "failed": outcome.kind, "detail": outcome.detail, "meta": outcome.meta})
    else:
        row.update({"label": outcome.label.value, "reasoning": outcome.reasoning, "meta": outcome.meta})
    return row


def cmd_classify(args) -> int:
    cfg = resolve_endpoint(args, _load_config_file(args.config))
    mode = _MODES[args.mode]
    transcript = TranscriptWriter(args.transcript) if args.transcript else None

    if args.text is not None:
        outcome = classify(args.text, cfg, mode, transcript)
        if isinstance(outcome, FailedOutcome):
            print(f"unparseable completion ({outcome.detail})")
        else:
            print(outcome.label.value if outcome.reasoning is None
                  else f"{outcome.label.value}  [{outcome.reasoning}]")
        return 0

    ds = load_dataset(args.input)
    outcomes = classify_batch([r.text for r in ds.records], cfg, mode, transcript)
    if all(isinstance(o, FailedOutcome) and o.kind in ("transport", "endpoint") for o in outcomes):
        print("all requests failed; endpoint unreachable or rejecting", file=sys.stderr)
        return 2
    out = Path(args.output)
    with out.open("w", encoding="utf-8") as f:
        for rec, outcome in zip(ds.records, outcomes):
            f.write(json.dumps(_outcome_row(rec.id, rec.text, outcome), ensure_ascii=False) + "\n")
    write_manifest("classify", _endpoint_settings(cfg, args.mode), [Path(args.input)],
                   [out], manifest_path=_mpath(args))
    ok = sum(1 for o in outcomes if not isinstance(o, FailedOutcome))
    print(f"classified {ok}/{len(outcomes)} -> {out}")
    return 0


def _outcomes_from_rows(rows: list[dict]):
    outcomes = []
    for row in rows:
        if row.get("label"):
            outcomes.append(ClassificationOutcome(label=PolarityLabel(row["label"]),
                                                  reasoning=row.get("reasoning"), raw=""))
        else:
            outcomes.append(FailedOutcome(kind=row.get("failed", "parse"), detail=row.get("detail", "")))
    return outcomes


def cmd_eval(args) -> int:
    ds = load_dataset(args.input)
    gold = [r.label for r in ds.records]
    if any(g is None for g in gold):
        raise DatasetError("eval needs gold labels on every record")

    if args.predictions:
        rows = [json.loads(line) for line in Path(args.predictions).read_text(encoding="utf-8").splitlines()
                if line.strip()]
        if len(rows) != len(ds.records):
            raise DatasetError(f"predictions has {len(rows)} rows, dataset has {len(ds.records)}")
        by_id = {row["id"]: row for row in rows}
        missing = [r.id for r in ds.records if r.id not in by_id]
        if missing:
            raise DatasetError(f"predictions missing ids: {missing[:5]}")
        outcomes = _outcomes_from_rows([by_id[r.id] for r in ds.records])
        settings = {"predictions": args.predictions}
    else:
        cfg = resolve_endpoint(args, _load_config_file(args.config))
        transcript = TranscriptWriter(args.transcript) if args.transcript else None
        outcomes = classify_batch([r.text for r in ds.records], cfg, _MODES[args.mode], transcript)
        if all(isinstance(o, FailedOutcome) and o.kind in ("transport", "endpoint") for o in outcomes):
            print("all requests failed; endpoint unreachable or rejecting", file=sys.stderr)
            return 2
        settings = _endpoint_settings(cfg, args.mode)

    report = score(outcomes, gold, run_id=args.run_id, mode=args.mode,
                   metadata={"dataset_name": ds.name})
    print(render_report(report, format="markdown"))
    if args.output:
        out = Path(args.output)
        out.write_text(render_report(report, format="json") + "\n", encoding="utf-8")
        write_manifest("eval", settings, [Path(args.input)], [out], manifest_path=_mpath(args))
        print(f"report -> {out}")
    return 0


def cmd_compare(args) -> int:
    reports = []
    for path in args.reports:
        reports.append(EvalReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8"))))
    cmp = compare_runs(reports, reference_run_id=args.reference)
    print(render_report(cmp, format=args.format))
    return 0


def cmd_lora_params(args) -> int:
    if args.arch in bundled_arch_names():
        bundle = bundled_arch(args.arch)
    else:
        bundle = load_arch(args.arch)
    lora = LoraSpec(rank=args.rank)
    rows = lora_param_breakdown(bundle.arch, lora)
    total = sum(row["params_total"] for row in rows)
    if args.json:
        payload = {"arch": bundle.arch.name, "rank": lora.rank, "breakdown": rows, "computed_total": total}
        if bundle.reported_lora_params:
            cmp = compare_to_published(total, bundle.reported_lora_params)
            payload["reported"] = bundle.reported_lora_params
            payload["verdict"] = cmp.verdict.value
            payload["relative_diff"] = cmp.relative_diff
        print(json.dumps(payload, indent=2))
        return 0
    print(f"{bundle.arch.name}  (rank {lora.rank}, targets {', '.join(lora.target_modules)})")
    print(f"{'module':<8}{'d_in':>8}{'d_out':>8}{'per layer':>12}{'total':>14}")
    for row in rows:
        print(f"{row['module']:<8}{row['d_in']:>8}{row['d_out']:>8}"
              f"{row['params_per_layer']:>12,}{row['params_total']:>14,}")
    print(f"computed trainable parameters: {total:,}")
    if bundle.reported_lora_params:
        cmp = compare_to_published(total, bundle.reported_lora_params)
        print(f"reported: {bundle.reported_lora_params:,} -> {cmp.verdict.value} "
              f"({cmp.relative_diff:.2%} deviation, tolerance {cmp.tolerance:.0%})")
    return 0


# -- parser ---------------------------------------------------------------


def _mpath(args) -> Path | None:
    return Path(args.manifest) if getattr(args, "manifest", None) else None


def _add_endpoint_flags(p: _Parser) -> None:
    p.add_argument("--endpoint", help=f"base URL (default: ${ENV_ENDPOINT})")
    p.add_argument("--model", help="model name sent in requests")
    p.add_argument("--api-key", help=f"bearer token (default: ${ENV_API_KEY})")
    p.add_argument("--config", help="JSON settings file, lowest precedence after defaults")
    p.add_argument("--mode", choices=sorted(_MODES), default="thinking")
    p.add_argument("--temperature", type=float)
    p.add_argument("--max-new-tokens", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--retries", type=int)
    p.add_argument("--max-in-flight", type=int)
    p.add_argument("--transcript", help="append request/response JSONL here")


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description="explainable Khmer polarity classification toolkit")
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="load and validate a corpus file")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    p.add_argument("--name")
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("clean", help="normalize record text")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--respell-map", help="two-column TSV of respellings")
    p.add_argument("--keep-case", action="store_true")
    p.add_argument("--keep-punctuation", action="store_true")
    p.add_argument("--keep-emoji", action="store_true")
    p.add_argument("--keep-symbols", action="store_true")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("autolabel", help="heuristic lexicon labeling with rationales")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--lexicon", help="term<TAB>polarity TSV; bundled starter when omitted")
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_autolabel)

    p = sub.add_parser("split", help="seeded train/test split")
    p.add_argument("--input", required=True)
    p.add_argument("--output-train", required=True)
    p.add_argument("--output-test", required=True)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("serve-curation", help="run the review service")
    p.add_argument("--queue", help="labeled dataset to enqueue at startup")
    p.add_argument("--log", default="curation.log.jsonl")
    p.add_argument("--snapshot", help="initial-queue snapshot path (default: <log>.queue.jsonl)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--lease-seconds", type=float, default=600.0)
    p.add_argument("--ui", help="directory with the built browser UI")
    p.set_defaults(func=cmd_serve_curation)

    p = sub.add_parser("export-train", help="emit chat-format training JSONL plus recipe")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_export_train)

    p = sub.add_parser("classify", help="classify text via a served model")
    p.add_argument("--text", help="classify one string and print the result")
    p.add_argument("--input", help="dataset to classify")
    p.add_argument("--output", help="predictions JSONL (required with --input)")
    p.add_argument("--manifest")
    _add_endpoint_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval", help="score a model or a predictions file on a labeled set")
    p.add_argument("--input", required=True, help="gold-labeled dataset")
    p.add_argument("--predictions", help="score this classify output instead of calling an endpoint")
    p.add_argument("--run-id", default="run")
    p.add_argument("--output", help="write the JSON report here")
    p.add_argument("--manifest")
    _add_endpoint_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="rank eval reports for one dataset")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--reference", help="run_id to take deltas against")
    p.add_argument("--format", choices=["markdown", "json"], default="markdown")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("lora-params", help="adapter parameter arithmetic for an architecture")
    p.add_argument("--arch", required=True,
                   help=f"bundled name ({', '.join(bundled_arch_names())}) or a JSON file")
    p.add_argument("--rank", type=int, default=32)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lora_params)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "classify" and args.text is None:
        if not args.input or not args.output:
            parser.error("classify needs --text, or --input with --output")
    try:
        return args.func(args)
    except (DatasetError, CurationError, LexiconError, PromptError) as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"{PROG}: {exc}", file=sys.stderr)
        return 1
    except TransportError as exc:
        print(f"{PROG}: transport failure: {exc}", file=sys.stderr)
        return 2
    except EndpointError as exc:
        print(f"{PROG}: endpoint failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
