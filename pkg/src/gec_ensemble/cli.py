"""Command-line interface: every pipeline stage as a subcommand.

Scores are printed as percentages with two decimals. Per-stage wall-clock
time goes to stderr. Exit code is 0 only if every record succeeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

from gec_ensemble import __version__
from gec_ensemble.alignment import KERNEL
from gec_ensemble.annotation import (
    agreement,
    build_sheet,
    read_sheet,
    render_agreement,
    render_tally,
    tally,
    write_sheet,
)
from gec_ensemble.corpus import (
    CorpusError,
    OutputRecord,
    read_parallel,
    read_references,
    read_text_lines,
    write_outputs,
)
from gec_ensemble.edits import (
    Edit,
    EditSet,
    EditValidationError,
    apply_edits,
    extract_edits,
)
from gec_ensemble.ensemble import (
    DEFAULT_COMBINATION_CAP,
    EDIT_COMBINATION,
    EDIT_LEVEL,
    SENTENCE_LEVEL,
    EnsembleInput,
    RecordFailure,
    run_corpus,
    vote,
)
from gec_ensemble.evaluation import corpus_scores, match_sentence
from gec_ensemble.scoring import ExternalScorer, NGramModel, ScoringError, train_ngram

SCORER_ENV = "GEC_SCORER_CMD"

STRATEGY_ALIASES = {
    "sentence": SENTENCE_LEVEL,
    "edit": EDIT_LEVEL,
    "combo": EDIT_COMBINATION,
}


@dataclass
class RunConfig:
    command: str
    strategy: str | None = None
    scorer: str | None = None
    threshold: int | None = None
    cap: int | None = None
    cap_fallback: str | None = None
    seed: int | None = None
    jobs: int | None = None
    source: str | None = None
    hypotheses: tuple[str, ...] | None = None
    output_format: str | None = None
    version: str = __version__

    def as_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _open_scorer(spec: str | None, timeout: float):
    """Resolve a scorer spec: "ngram:<model>", "cmd:<command>" or "cmd"."""
    if spec is None or spec == "cmd":
        command = os.environ.get(SCORER_ENV)
        if not command:
            raise ScoringError(
                f"no scorer given: pass --scorer or set {SCORER_ENV}"
            )
        return ExternalScorer(command, timeout=timeout), f"cmd:{command}"
    if spec.startswith("ngram:"):
        return NGramModel.load(spec[len("ngram:") :]), spec
    if spec.startswith("cmd:"):
        return ExternalScorer(spec[len("cmd:") :], timeout=timeout), spec
    raise ScoringError(f"unknown scorer spec {spec!r}")


def _timed(name: str, start: float) -> None:
    print(f"[time] {name}: {time.perf_counter() - start:.2f}s", file=sys.stderr)


def _out_handle(path: str | None):
    return open(path, "w", encoding="utf-8", newline="\n") if path else sys.stdout


def _emit_records(args, records, config: RunConfig) -> None:
    if args.format == "text":
        handle = _out_handle(args.out)
        try:
            for record in records:
                handle.write((record.output if record.error is None else "") + "\n")
        finally:
            if args.out:
                handle.close()
        return
    if args.out:
        write_outputs(records, args.out, fmt=args.format, config=config.as_dict())
    else:
        write_outputs(records, sys.stdout, fmt=args.format, config=config.as_dict())


def _ensemble_records(args, outputs, sources) -> tuple[list[OutputRecord], int]:
    records: list[OutputRecord] = []
    failures = 0
    for i, item in enumerate(outputs):
        if isinstance(item, RecordFailure):
            failures += 1
            records.append(
                OutputRecord(
                    id=i + 1,
                    source=sources[i],
                    output=None,
                    strategy=None,
                    ppl=None,
                    capped=False,
                    error=item.error,
                )
            )
        else:
            records.append(
                OutputRecord(
                    id=i + 1,
                    source=sources[i],
                    output=item.final,
                    strategy=item.strategy,
                    ppl=item.ppl,
                    capped=item.capped,
                    edits=item.chosen_edits.edits,
                )
            )
    return records, failures


def _load_inputs(source_path: str, hyp_paths: list[str]) -> tuple[list[str], list[EnsembleInput]]:
    corpus = read_parallel(source_path, hyp_paths)
    sources = [record.source for record in corpus]
    inputs = [
        EnsembleInput(
            record.source,
            tuple(extract_edits(record.source, hyp) for hyp in record.hypotheses),
        )
        for record in corpus
    ]
    return sources, inputs


def cmd_extract(args) -> int:
    start = time.perf_counter()
    sources = read_text_lines(args.source)
    hyps = read_text_lines(args.hyp)
    if len(sources) != len(hyps):
        raise CorpusError(
            f"{args.hyp}: {len(hyps)} lines but {args.source} has {len(sources)}"
        )
    handle = _out_handle(args.out)
    try:
        for i, (source, hyp) in enumerate(zip(sources, hyps), start=1):
            edits = extract_edits(source, hyp)
            payload = {
                "id": i,
                "source": source,
                "edits": [
                    {"start": e.start, "end": e.end, "replacement": e.replacement}
                    for e in edits
                ],
            }
            handle.write(json.dumps(payload, ensure_ascii=False) + "\n")
    finally:
        if args.out:
            handle.close()
    _timed("extract", start)
    return 0


def cmd_apply(args) -> int:
    start = time.perf_counter()
    sources = read_text_lines(args.source)
    handle = _out_handle(args.out)
    failures = 0
    try:
        with open(args.edits, encoding="utf-8") as edits_file:
            rows = [
                json.loads(line)
                for line in edits_file
                if line.strip() and not line.startswith("#")
            ]
        if len(rows) != len(sources):
            raise CorpusError(
                f"{args.edits}: {len(rows)} records but {args.source} has {len(sources)} lines"
            )
        for source, row in zip(sources, rows):
            edits = EditSet.from_edits(
                (Edit(e["start"], e["end"], e["replacement"]) for e in row["edits"]),
                len(source),
            )
            handle.write(apply_edits(source, edits) + "\n")
    finally:
        if args.out:
            handle.close()
    _timed("apply", start)
    return 1 if failures else 0


def cmd_vote(args) -> int:
    start = time.perf_counter()
    sources, inputs = _load_inputs(args.source, args.hyp)
    outputs = [vote(inp, args.threshold) for inp in inputs]
    records, failures = _ensemble_records(args, outputs, sources)
    config = RunConfig(
        command="vote",
        strategy="vote",
        threshold=args.threshold,
        source=args.source,
        hypotheses=tuple(args.hyp),
        output_format=args.format,
    )
    _emit_records(args, records, config)
    _timed("vote", start)
    return 1 if failures else 0


def cmd_ensemble(args) -> int:
    start = time.perf_counter()
    strategy = STRATEGY_ALIASES[args.strategy]
    sources, inputs = _load_inputs(args.source, args.hyp)
    backend, scorer_desc = _open_scorer(args.scorer, args.timeout)
    try:
        outputs = run_corpus(
            strategy,
            inputs,
            backend,
            cap=args.cap,
            cap_fallback=args.cap_fallback,
            jobs=args.jobs,
            capture_errors=True,
        )
    finally:
        if isinstance(backend, ExternalScorer):
            backend.close()
    records, failures = _ensemble_records(args, outputs, sources)
    capped = sum(
        1 for record in records if record.error is None and record.capped
    )
    config = RunConfig(
        command="ensemble",
        strategy=strategy,
        scorer=scorer_desc,
        cap=args.cap,
        cap_fallback=args.cap_fallback,
        jobs=args.jobs,
        source=args.source,
        hypotheses=tuple(args.hyp),
        output_format=args.format,
    )
    _emit_records(args, records, config)
    print(f"[ensemble] capped: {capped} of {len(records)}", file=sys.stderr)
    _timed(f"ensemble/{strategy}", start)
    return 1 if failures else 0


def cmd_train_ngram(args) -> int:
    start = time.perf_counter()
    corpus = read_text_lines(args.corpus)
    model = train_ngram(corpus, order=args.order, k=args.k)
    model.save(args.out)
    print(
        f"[train-ngram] order={model.order} k={model.k} vocab={len(model.vocab)} "
        f"contexts={len(model.counts)}",
        file=sys.stderr,
    )
    _timed("train-ngram", start)
    return 0


def cmd_eval(args) -> int:
    start = time.perf_counter()
    sources = read_text_lines(args.source)
    hyps = read_text_lines(args.hyp)
    if len(sources) != len(hyps):
        raise CorpusError(
            f"{args.hyp}: {len(hyps)} lines but {args.source} has {len(sources)}"
        )
    references = read_references(args.refs)
    if len(references) != len(sources):
        raise CorpusError(
            f"{args.refs}: {len(references)} sentences but {args.source} "
            f"has {len(sources)} lines"
        )
    per_sentence = []
    for i, (source, hyp) in enumerate(zip(sources, hyps), start=1):
        entry = references.get(i)
        if entry is None:
            raise CorpusError(f"{args.refs}: no block for sentence {i}")
        if entry.source != source:
            raise CorpusError(
                f"{args.refs}: sentence {i} source differs from {args.source}"
            )
        per_sentence.append(
            match_sentence(source, extract_edits(source, hyp), entry.annotators)
        )
    scores = corpus_scores(per_sentence)
    total_tp = sum(c.tp for c in per_sentence)
    total_fp = sum(c.fp for c in per_sentence)
    total_fn = sum(c.fn for c in per_sentence)
    print("matching: canonical minimal char edits, best annotator per sentence")
    print(f"TP {total_tp}  FP {total_fp}  FN {total_fn}")
    print(
        f"P {scores.precision * 100:.2f}  R {scores.recall * 100:.2f}  "
        f"F0.5 {scores.f_half * 100:.2f}"
    )
    _timed("eval", start)
    return 0


def cmd_sample(args) -> int:
    start = time.perf_counter()
    sources = read_text_lines(args.source)
    references = read_references(args.refs)
    ref_sentences = []
    for i, source in enumerate(sources, start=1):
        entry = references.get(i)
        if entry is None:
            raise CorpusError(f"{args.refs}: no block for sentence {i}")
        ref_sentences.append(
            [apply_edits(source, edit_set) for edit_set in entry.annotators]
        )
    system_outputs = {}
    for item in args.system:
        name, sep, path = item.partition("=")
        if not sep:
            raise CorpusError(f"--system expects NAME=FILE, got {item!r}")
        system_outputs[name] = read_text_lines(path)
    entries = build_sheet(sources, system_outputs, ref_sentences, args.n, args.seed)
    write_sheet(args.out, entries)
    print(f"[sample] wrote {len(entries)} samples to {args.out}", file=sys.stderr)
    _timed("sample", start)
    return 0


def cmd_tally(args) -> int:
    start = time.perf_counter()
    entries = read_sheet(args.sheet)
    counts = tally(entries)
    print(f"samples: {len(entries)}")
    print(render_tally(counts))
    _timed("tally", start)
    return 0


def cmd_agreement(args) -> int:
    start = time.perf_counter()
    first = read_sheet(args.sheet_a)
    second = read_sheet(args.sheet_b)
    rate, confusion = agreement(first, second)
    print(render_agreement(rate, confusion))
    _timed("agreement", start)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gec-ensemble",
        description="Ensemble GEC system outputs by edit voting and "
        "perplexity-guided selection.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract character edits from parallel files")
    p.add_argument("--source", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("apply", help="apply extracted edits back to sources")
    p.add_argument("--source", required=True)
    p.add_argument("--edits", required=True, help="JSONL file produced by extract")
    p.add_argument("--out")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("vote", help="threshold voting over system edits")
    p.add_argument("--source", required=True)
    p.add_argument("--hyp", action="append", required=True)
    p.add_argument("--threshold", "-t", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--format", choices=("jsonl", "tsv", "text"), default="jsonl")
    p.set_defaults(func=cmd_vote)

    p = sub.add_parser("ensemble", help="perplexity-guided ensemble strategies")
    p.add_argument("--source", required=True)
    p.add_argument("--hyp", action="append", required=True)
    p.add_argument("--strategy", choices=sorted(STRATEGY_ALIASES), required=True)
    p.add_argument(
        "--scorer",
        help="ngram:<model.json>, cmd:<command line>, or cmd to use $" + SCORER_ENV,
    )
    p.add_argument("--cap", type=int, default=DEFAULT_COMBINATION_CAP)
    p.add_argument("--cap-fallback", choices=("none", "edit-level"), default="none")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--out")
    p.add_argument("--format", choices=("jsonl", "tsv", "text"), default="jsonl")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("train-ngram", help="train the built-in character n-gram scorer")
    p.add_argument("--corpus", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--k", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_ngram)

    p = sub.add_parser("eval", help="char-level P/R/F0.5 against references")
    p.add_argument("--source", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--refs", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sample", help="draw an annotation sample sheet")
    p.add_argument("--source", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument(
        "--system", action="append", required=True, help="NAME=FILE, repeatable"
    )
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("tally", help="tally a labeled annotation sheet")
    p.add_argument("--sheet", required=True)
    p.set_defaults(func=cmd_tally)

    p = sub.add_parser("agreement", help="observed agreement of two labeled sheets")
    p.add_argument("sheet_a")
    p.add_argument("sheet_b")
    p.set_defaults(func=cmd_agreement)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CorpusError, EditValidationError, ScoringError, ValueError, OSError) as exc:
        print(f"gec-ensemble: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
