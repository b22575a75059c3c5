"""Command-line entry point: ingest, run, predict and correct.

Exit codes: 0 success (``run``: at least one grid cell succeeded),
1 when every grid cell failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_mod
from .config import ENV_PREFIX, RunConfig, field_help
from .corpus import CorpusError, ParseStats, Polarity, ensure_segmented
from .correction import CorrectionConfig, Fallback, correct_document
from .experiment import run_experiment, tokenize_sentences
from .learn import SchemeMismatchError, TrainedModel, predict
from .naive import NaiveSentenceModel
from .report import ReportError, emit_report, render_table
from .textproc import ConfigError, FeatureScheme

log = logging.getLogger("revpolar")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# ingest

def _label_files(root: Path, fmt: str) -> dict[Polarity, Path]:
    suffixes = (".review",) if fmt == "blitzer" else (".jsonl", ".json")
    found = {}
    for label in Polarity:
        for suffix in suffixes:
            candidate = root / f"{label.value}{suffix}"
            if candidate.is_file():
                found[label] = candidate
                break
    return found


def cmd_ingest(args) -> int:
    src = Path(args.input)
    stats = ParseStats()
    if src.is_file():
        if args.format != "jsonl":
            raise UsageError(f"{src} is a file; blitzer input must be a directory holding positive.review/negative.review")
        docs = corpus_mod.read_corpus(src, stats)
        if args.domain:
            docs = [corpus_mod.ReviewDocument(d.id, args.domain, d.label, d.raw_text, d.sentences) for d in docs]
    elif src.is_dir():
        files = _label_files(src, args.format)
        if not files:
            raise UsageError(f"no positive/negative {args.format} files under {src}")
        docs = []
        for label, path in files.items():
            docs.extend(corpus_mod.parse_review_records(path, args.domain, label, stats))
    else:
        raise UsageError(f"input {src} does not exist")
    docs = ensure_segmented(docs)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_corpus(docs, out)
    n_pos = sum(d.label is Polarity.POSITIVE for d in docs)
    n_sent = sum(len(d.sentences) for d in docs)
    print(f"ingested {len(docs)} documents ({n_pos} positive, {len(docs) - n_pos} negative), "
          f"{n_sent} sentences -> {out}")
    if stats.skipped or stats.replaced_chars:
        print(f"skipped {stats.skipped} malformed record(s); replaced {stats.replaced_chars} invalid "
              f"UTF-8 sequence(s)", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# run

def build_run_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            cfg = RunConfig.from_text(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    cfg = cfg.with_env()
    flags = {name: getattr(args, name) for name, _, _ in field_help() if getattr(args, name, None) is not None}
    if args.no_correction:
        flags["trainset_correction"] = False
        flags["sentence_correction"] = False
    cfg = cfg.updated(flags)
    for spec in args.corpus or []:
        domain, sep, path = spec.partition("=")
        if not sep:
            raise UsageError(f"--corpus expects DOMAIN=PATH, got {spec!r}")
        cfg.corpora[domain] = path
    if not cfg.corpora:
        raise UsageError("no corpus given (use --corpus DOMAIN=PATH or a [domain:NAME] config section)")
    return cfg.validate()


def cmd_run(args) -> int:
    cfg = build_run_config(args)
    out = Path(cfg.output_dir)
    reports = []
    for domain in sorted(cfg.corpora):
        path = Path(cfg.corpora[domain])
        try:
            docs = corpus_mod.read_corpus(path)
        except CorpusError as exc:
            raise UsageError(str(exc)) from exc
        result = run_experiment(docs, cfg.settings(domain))
        reports.extend(result.reports)
        _write_run_artifacts(out, domain, result)

    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "run.cfg").write_text(cfg.to_text(), encoding="utf-8")
        emit_report(reports, "csv", out / "report.csv")
        emit_report(reports, "json", out / "report.json")
        emit_report(reports, "text", out / "report.txt")
    except (OSError, ReportError) as exc:
        raise UsageError(str(exc)) from exc
    print(render_table(reports), end="")
    n_ok = sum(r.ok for r in reports)
    if n_ok < len(reports):
        print(f"{len(reports) - n_ok} of {len(reports)} cell(s) failed", file=sys.stderr)
    return EXIT_OK if n_ok else EXIT_PARTIAL


def _write_run_artifacts(out: Path, domain: str, result) -> None:
    models_dir = out / "models" / domain
    pred_dir = out / "predictions" / domain
    models_dir.mkdir(parents=True, exist_ok=True)
    pred_dir.mkdir(parents=True, exist_ok=True)
    for name, model in result.models.items():
        model.save(models_dir / f"{name}.model")
        with open(pred_dir / f"{name}.jsonl", "w", encoding="utf-8") as fh:
            for row in result.predictions[name]:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    if result.corrected is not None:
        result.corrected.naive.save(models_dir / "naive.model")
        trace_dir = out / "traces"
        trace_dir.mkdir(parents=True, exist_ok=True)
        for part, docs in (("train", result.corrected.train), ("test", result.corrected.test)):
            with open(trace_dir / f"{domain}-{part}.jsonl", "w", encoding="utf-8") as fh:
                for doc in docs:
                    if doc.consistency is not None:
                        fh.write(json.dumps(doc.consistency.trace(doc.id), sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# predict / correct

def _load_model(path: str) -> TrainedModel:
    try:
        return TrainedModel.load(path)
    except OSError as exc:
        raise UsageError(f"cannot read model {path}: {exc}") from exc
    except (ValueError, KeyError, IndexError) as exc:
        raise UsageError(f"{path} is not a valid model file: {exc}") from exc


def _read_docs(path: str):
    try:
        return ensure_segmented(corpus_mod.read_corpus(path))
    except CorpusError as exc:
        raise UsageError(str(exc)) from exc


def _correction_from(model_meta: dict, args) -> CorrectionConfig:
    stored = model_meta.get("correction", {})
    return CorrectionConfig(theta=args.theta if args.theta is not None else stored.get("theta", 2),
                            negation_window=stored.get("negation_window", 3),
                            fallback=Fallback.parse(args.fallback or stored.get("fallback", "KeepAll")))


def _open_out(path: str | None):
    if not path or path == "-":
        return sys.stdout
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8")


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    if args.scheme and FeatureScheme.parse(args.scheme) is not model.scheme:
        raise UsageError(f"model {args.model} uses {model.scheme.value} features, not {args.scheme}")
    docs = _read_docs(args.input)
    cfg = None
    if args.correct:
        if model.naive is None:
            raise UsageError(f"model {args.model} carries no sentence model; --correct needs a corrected model")
        cfg = _correction_from(model.metadata, args)
    fh = _open_out(args.out)
    try:
        for doc in docs:
            row = {"id": doc.id, "gold": doc.label.value}
            if cfg is not None:
                doc = correct_document(tokenize_sentences(doc, cfg.negation_window), model.naive, cfg)
                row["kept"] = sorted(doc.consistency.kept)
                row["removed"] = sorted(doc.consistency.removed_outliers)
            try:
                label, score = predict(model, doc)
            except SchemeMismatchError as exc:
                raise UsageError(str(exc)) from exc
            row.update(predicted=label.value, score=score)
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_correct(args) -> int:
    if bool(args.model) == bool(args.naive):
        raise UsageError("give exactly one of --model (a corrected model) or --naive (a sentence model)")
    if args.model:
        model = _load_model(args.model)
        if model.naive is None:
            raise UsageError(f"model {args.model} carries no sentence model")
        naive, meta = model.naive, model.metadata
    else:
        try:
            naive, meta = NaiveSentenceModel.load(args.naive), {}
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load sentence model {args.naive}: {exc}") from exc
    cfg = _correction_from(meta, args)
    if args.negation_window is not None:
        cfg = CorrectionConfig(cfg.theta, args.negation_window, fallback=cfg.fallback)
    docs = [correct_document(tokenize_sentences(d, cfg.negation_window), naive, cfg) for d in _read_docs(args.input)]
    fh = _open_out(args.out)
    try:
        for doc in docs:
            fh.write(json.dumps(doc.consistency.trace(doc.id), sort_keys=True) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.corpus_out:
        corpus_mod.write_corpus(docs, args.corpus_out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    for name, default, text in field_help():
        flag = "--" + name.replace("_", "-")
        shown = default if default != "" else "(none)"
        help_text = f"{text} [default: {shown}; env {ENV_PREFIX}{name.upper()}]".replace("%", "%%")
        if isinstance(default, bool):
            p.add_argument(flag, dest=name, action=argparse.BooleanOptionalAction, default=None, help=help_text)
        else:
            p.add_argument(flag, dest=name, type=type(default), default=None, help=help_text)
    p.add_argument("--no-correction", action="store_true",
                   help="disable both correction stages (corrected rows then run the plain pipeline)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="revpolar", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and segment raw reviews into a JSONL corpus")
    p.add_argument("--input", required=True, help="directory with positive/negative files, or a corpus JSONL file")
    p.add_argument("--domain", required=True)
    p.add_argument("--format", choices=("blitzer", "jsonl"), default="blitzer")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("run", help="run the evaluation grid and write reports, models and traces")
    p.add_argument("--config", help="key=value config file with [run] and [domain:NAME] sections")
    p.add_argument("--corpus", action="append", metavar="DOMAIN=PATH", help="corpus JSONL per domain (repeatable)")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("predict", help="predict document polarity with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="corpus JSONL")
    p.add_argument("--correct", action="store_true", help="apply sentence-level correction first")
    p.add_argument("--scheme", help="expected feature scheme; mismatch exits 2")
    p.add_argument("--theta", type=int)
    p.add_argument("--fallback")
    p.add_argument("--out", help="output JSONL (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("correct", help="apply sentence-level correction and print per-document traces")
    p.add_argument("--model", help="corrected model file bundling a sentence model")
    p.add_argument("--naive", help="standalone sentence model file")
    p.add_argument("--input", required=True, help="corpus JSONL")
    p.add_argument("--theta", type=int)
    p.add_argument("--fallback")
    p.add_argument("--negation-window", type=int)
    p.add_argument("--out", help="trace JSONL (default stdout)")
    p.add_argument("--corpus-out", help="also write the corrected corpus here")
    p.set_defaults(func=cmd_correct)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, CorpusError, ReportError) as exc:
        print(f"revpolar {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
