"""Command-line surface: run, wer, normalize, train-estimator, predict,
report. Reports dual-emit machine-readable JSON and an aligned text table;
the JSON is the contract."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import dataset, estimator, metrics, pipeline, textnorm
from .engines import load_registry
from .estimator import TrainConfig
from .lstm import EstimatorModel, ModelConfig


class CliError(Exception):
    """Configuration or I/O error; maps to a nonzero exit status."""


def _load_corpus(args) -> dataset.Corpus:
    if args.format == "ljspeech":
        if not args.wav_dir:
            raise CliError("--wav-dir is required with --format ljspeech")
        corpus = dataset.load_ljspeech(args.corpus, args.wav_dir)
    else:
        corpus = dataset.load_manifest(args.corpus)
    if getattr(args, "sample", None):
        corpus = dataset.sample(corpus, args.sample, args.seed)
    return corpus


def _format_table(rows: list[dict], columns: list[str]) -> str:
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [
        max(len(c), *(len(row[i]) for row in cells)) if cells else len(c)
        for i, c in enumerate(columns)
    ]
    lines = [
        "  ".join(c.ljust(w) for c, w in zip(columns, widths)),
        "  ".join("-" * w for w in widths),
    ]
    for row in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _summary_rows(summary: pipeline.RunSummary) -> list[dict]:
    rows = []
    for cell in summary.cells:
        row = dict(cell)
        counts = row.pop("outcome_counts")
        row.update({f"n_{k}": v for k, v in counts.items()})
        rows.append(row)
    return rows


def _print_summary(summary: pipeline.RunSummary) -> None:
    columns = [
        "tts_id", "asr_under_test", "executed", "n_success", "n_failed",
        "n_indeterminable", "n_engine_error", "false_alarms",
        "false_alarm_rate", "mean_wer_tts", "mean_wer_human",
    ]
    print(_format_table(_summary_rows(summary), columns))
    totals = summary.totals
    print(
        f"total: {totals['executed']} cases, {totals['false_alarms']} false "
        f"alarms, rate {totals['false_alarm_rate']:.4f}"
    )


def cmd_run(args) -> int:
    registry = load_registry(args.engines)
    tts_ids = args.tts or [e.id for e in registry.values() if e.kind == "tts"]
    asr_ids = [e.id for e in registry.values() if e.kind == "asr"]
    if args.asr_under_test not in registry:
        raise CliError(f"unknown ASR under test {args.asr_under_test!r}")
    cross_ids = args.cross_ref or [i for i in asr_ids if i != args.asr_under_test]
    if args.asr_under_test in cross_ids:
        raise CliError("cross-reference pool must exclude the ASR under test")
    missing = [i for i in [*tts_ids, *cross_ids] if i not in registry]
    if missing:
        raise CliError(f"unknown engine ids: {missing}")
    if not cross_ids:
        raise CliError("at least one cross-reference ASR is required")

    corpus = _load_corpus(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_dir = Path(args.cache) if args.cache else out_dir / "cache"
    store = pipeline.ResultsStore(out_dir / "results.jsonl")
    cache = pipeline.AudioCache(cache_dir)

    manifest = {
        "corpus": str(args.corpus),
        "format": args.format,
        "engine_registry": str(args.engines),
        "engine_registry_sha256": hashlib.sha256(
            Path(args.engines).read_bytes()
        ).hexdigest(),
        "asr_under_test": args.asr_under_test,
        "cross_refs": cross_ids,
        "tts": tts_ids,
        "parallelism": args.jobs,
        "seed": args.seed,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    results = pipeline.run_experiment(
        corpus.utterances,
        [registry[i] for i in tts_ids],
        registry[args.asr_under_test],
        [registry[i] for i in cross_ids],
        cache,
        store,
        jobs=args.jobs,
        min_other_failures=args.min_other_failures,
    )
    summary = pipeline.aggregate(results)
    (out_dir / "summary.json").write_text(
        json.dumps(summary.to_json(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    _print_summary(summary)
    return 0


def cmd_wer(args) -> int:
    reference = textnorm.normalize_text(Path(args.reference).read_text(encoding="utf-8"))
    hypothesis = textnorm.normalize_text(Path(args.hypothesis).read_text(encoding="utf-8"))
    if not reference:
        raise CliError("reference normalizes to empty text; WER undefined")
    breakdown = metrics.align(reference, hypothesis)
    rate = metrics.wer(breakdown)
    print(
        f"WER {rate:.6f} (I={breakdown.insertions} D={breakdown.deletions} "
        f"S={breakdown.substitutions} N={breakdown.reference_length})"
    )
    return 0


def cmd_normalize(args) -> int:
    table = (
        textnorm.load_abbreviation_table(args.abbreviations)
        if args.abbreviations
        else None
    )
    text = (
        Path(args.input).read_text(encoding="utf-8")
        if args.input != "-"
        else sys.stdin.read()
    )
    for line in text.splitlines():
        print(" ".join(textnorm.normalize_text(line, table)))
    return 0


def _load_results(paths: list[str]) -> list[pipeline.TestCaseResult]:
    results = []
    for path in paths:
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                results.append(pipeline.TestCaseResult.from_json(json.loads(line)))
    return results


def cmd_report(args) -> int:
    summary = pipeline.aggregate(_load_results(args.results))
    if args.out:
        Path(args.out).write_text(
            json.dumps(summary.to_json(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    _print_summary(summary)
    return 0


def cmd_train_estimator(args) -> int:
    results = _load_results(args.results)
    if not results:
        raise CliError("no results to train on")
    corpus = _load_corpus(args)
    texts = {u.id: u.raw_text for u in corpus.utterances}

    combos = sorted({(r.tts_id, r.asr_under_test) for r in results})
    fa_counts: dict[str, int] = {u_id: 0 for u_id in texts}
    for r in results:
        if r.utterance_id not in texts:
            continue
        if r.fa_status is pipeline.FalseAlarmStatus.CONFIRMED:
            fa_counts[r.utterance_id] += 1
    labeled = estimator.label_texts(fa_counts, len(combos))
    labels = {lt.label for lt in labeled}
    if len(labels) < 2:
        raise CliError(
            "labeling produced a single class; cannot train an estimator"
        )

    token_lists = {lt.text_id: textnorm.normalize_text(texts[lt.text_id]) for lt in labeled}
    vocab = estimator.build_vocabulary([token_lists[lt.text_id] for lt in labeled])
    max_len = args.max_len or max(len(t) for t in token_lists.values())
    examples = [
        estimator.EncodedExample(
            indices=estimator.encode(token_lists[lt.text_id], vocab, max_len),
            label=lt.label,
            text_id=lt.text_id,
        )
        for lt in labeled
    ]
    train_set, val_set, test_set = estimator.split_dataset(examples, args.seed)

    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        seed=args.seed,
        embed_dim=args.embed_dim,
        hidden_dim=args.hidden_dim,
        max_len=max_len,
    )
    model = EstimatorModel.initialize(
        ModelConfig(vocab.size, cfg.embed_dim, cfg.hidden_dim, max_len), cfg.seed
    )
    model, history = estimator.train(model, train_set, val_set, cfg)
    eval_metrics = estimator.evaluate(model, test_set)
    estimator.save_model(model, vocab, args.out)

    if args.dataset_out:
        with open(args.dataset_out, "w", encoding="utf-8") as f:
            for lt in labeled:
                f.write(
                    json.dumps(
                        {
                            "text_id": lt.text_id,
                            "text": texts[lt.text_id],
                            "fa_count": lt.fa_count,
                            "combos": lt.combos,
                            "label": lt.label,
                        },
                        ensure_ascii=False,
                        sort_keys=True,
                    )
                    + "\n"
                )

    report = {
        "precision": eval_metrics.precision,
        "recall": eval_metrics.recall,
        "accuracy": eval_metrics.accuracy,
        "f1": eval_metrics.f1,
        "train_size": len(train_set),
        "validation_size": len(val_set),
        "test_size": len(test_set),
        "history": history,
    }
    if args.report:
        Path(args.report).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    print(
        f"precision {eval_metrics.precision:.4f}  recall {eval_metrics.recall:.4f}  "
        f"accuracy {eval_metrics.accuracy:.4f}  f1 {eval_metrics.f1:.4f}"
    )
    return 0


def cmd_predict(args) -> int:
    try:
        model, vocab = estimator.load_model(args.model)
    except Exception as exc:
        raise CliError(f"cannot load model {args.model}: {exc}")
    if args.text is not None:
        lines = [args.text]
    else:
        lines = Path(args.input).read_text(encoding="utf-8").splitlines()
    for line in lines:
        prob, flag = estimator.predict(model, vocab, line)
        print(f"{prob:.6f}\t{1 if flag else 0}\t{line}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="falarm",
        description="Differential-testing harness for ASR systems with "
        "false-alarm detection and estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_corpus_args(p):
        p.add_argument("--corpus", required=True, help="corpus metadata/manifest file")
        p.add_argument("--format", choices=["ljspeech", "tsv"], default="tsv")
        p.add_argument("--wav-dir", help="WAV directory (ljspeech format)")
        p.add_argument("--sample", type=int, help="seeded subsample size")

    p_run = sub.add_parser("run", help="execute the differential-testing pipeline")
    add_corpus_args(p_run)
    p_run.add_argument("--engines", required=True, help="engine registry JSON")
    p_run.add_argument("--asr-under-test", required=True)
    p_run.add_argument("--cross-ref", nargs="*", help="cross-reference ASR ids (default: all other ASRs)")
    p_run.add_argument("--tts", nargs="*", help="TTS ids (default: all TTS engines)")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--cache", help="audio cache directory (default: <out>/cache)")
    p_run.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument(
        "--min-other-failures",
        type=int,
        default=1,
        help="cross-reference failures needed to confirm a false alarm",
    )
    p_run.set_defaults(func=cmd_run)

    p_wer = sub.add_parser("wer", help="word error rate between two text files")
    p_wer.add_argument("reference")
    p_wer.add_argument("hypothesis")
    p_wer.set_defaults(func=cmd_wer)

    p_norm = sub.add_parser("normalize", help="normalize text lines")
    p_norm.add_argument("input", help="input file, or - for stdin")
    p_norm.add_argument("--abbreviations", help="abbreviation table file")
    p_norm.set_defaults(func=cmd_normalize)

    p_rep = sub.add_parser("report", help="aggregate results files into a summary")
    p_rep.add_argument("results", nargs="+", help="results JSONL files")
    p_rep.add_argument("--out", help="write summary JSON here")
    p_rep.set_defaults(func=cmd_report)

    p_tr = sub.add_parser("train-estimator", help="train the false-alarm estimator")
    p_tr.add_argument("results", nargs="+", help="results JSONL files")
    add_corpus_args(p_tr)
    p_tr.add_argument("--out", required=True, help="model file (npz)")
    p_tr.add_argument("--report", help="metrics report JSON")
    p_tr.add_argument("--dataset-out", help="write the labeled dataset JSONL here")
    p_tr.add_argument("--epochs", type=int, default=20)
    p_tr.add_argument("--batch-size", type=int, default=32)
    p_tr.add_argument("--learning-rate", type=float, default=1e-3)
    p_tr.add_argument("--embed-dim", type=int, default=64)
    p_tr.add_argument("--hidden-dim", type=int, default=64)
    p_tr.add_argument("--max-len", type=int)
    p_tr.add_argument("--seed", type=int, default=0)
    p_tr.set_defaults(func=cmd_train_estimator)

    p_pred = sub.add_parser("predict", help="flag texts likely to produce false alarms")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("input", nargs="?", help="text file, one text per line")
    p_pred.add_argument("--text", help="single text instead of a file")
    p_pred.set_defaults(func=cmd_predict)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "predict" and args.input is None and args.text is None:
        print("error: provide an input file or --text", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
