"""Reading and writing of all corpus artifacts.

Everything is UTF-8. Line endings are normalized to LF on read and no BOM
is ever written. All readers tolerate (skip) the version header line
"# gec-ensemble v1" and, in our own output formats, "# "-prefixed header
lines carrying the run configuration.

Reference file format (one block per sentence, blank line between blocks):

    S <source sentence>
    A <start>|||<end>|||<replacement>|||<annotator-id>

"A -1|||-1|||noop|||<id>" records an annotator asserting the sentence needs
no change. Indices count Unicode scalar values of the S line.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from gec_ensemble.edits import Edit, EditSet, EditValidationError, validate_for_source

FORMAT_HEADER = "# gec-ensemble v1"
CONFIG_PREFIX = "# config: "


class CorpusError(ValueError):
    """Malformed or inconsistent corpus file."""


def _read_lines(path) -> list[str]:
    """All lines of a file, LF/CRLF normalized, version header skipped."""
    with open(path, encoding="utf-8", newline="") as handle:
        raw = handle.read()
    raw = raw.replace("\r\n", "\n").replace("\r", "\n")
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if lines and lines[0] == FORMAT_HEADER:
        lines = lines[1:]
    return lines


def read_text_lines(path) -> list[str]:
    return _read_lines(path)


@dataclass(frozen=True)
class ParallelRecord:
    id: int
    source: str
    hypotheses: tuple[str, ...]


def read_parallel(source_path, hyp_paths: Sequence) -> list[ParallelRecord]:
    """Line-aligned source plus N hypothesis files; ids are 1-based lines."""
    sources = _read_lines(source_path)
    all_hyps: list[list[str]] = []
    for path in hyp_paths:
        lines = _read_lines(path)
        if len(lines) != len(sources):
            first_bad = min(len(lines), len(sources)) + 1
            raise CorpusError(
                f"{path}: {len(lines)} lines but {source_path} has "
                f"{len(sources)} (first mismatching line {first_bad})"
            )
        all_hyps.append(lines)
    return [
        ParallelRecord(i + 1, source, tuple(h[i] for h in all_hyps))
        for i, source in enumerate(sources)
    ]


@dataclass(frozen=True)
class ReferenceEntry:
    id: int
    source: str
    annotator_ids: tuple[int, ...]
    annotators: tuple[EditSet, ...]  # parallel to annotator_ids


def read_references(path) -> dict[int, ReferenceEntry]:
    """Parse a reference file into {sentence id: references}."""
    lines = _read_lines(path)
    entries: dict[int, ReferenceEntry] = {}
    source: str | None = None
    pending: dict[int, list[Edit]] = {}
    noop_annotators: set[int] = set()
    next_id = 1

    def flush(line_no: int) -> None:
        nonlocal source, pending, noop_annotators, next_id
        if source is None:
            if pending or noop_annotators:
                raise CorpusError(f"{path}:{line_no}: A-line before any S-line")
            return
        annotator_ids = sorted(set(pending) | noop_annotators)
        if not annotator_ids:
            raise CorpusError(
                f"{path}:{line_no}: sentence {next_id} has no annotator lines"
            )
        edit_sets = []
        for annotator in annotator_ids:
            edits = pending.get(annotator, [])
            try:
                edit_set = EditSet.from_edits(edits, len(source))
                validate_for_source(source, edit_set)
            except EditValidationError as exc:
                raise CorpusError(
                    f"{path}: sentence {next_id}, annotator {annotator}: {exc}"
                ) from exc
            edit_sets.append(edit_set)
        entries[next_id] = ReferenceEntry(
            next_id, source, tuple(annotator_ids), tuple(edit_sets)
        )
        next_id += 1
        source = None
        pending = {}
        noop_annotators = set()

    for line_no, line in enumerate(lines, start=1):
        if line == "":
            flush(line_no)
            continue
        if line.startswith("S ") or line == "S":
            if source is not None:
                flush(line_no)
            source = line[2:]
        elif line.startswith("A "):
            if source is None:
                raise CorpusError(f"{path}:{line_no}: A-line before any S-line")
            fields = line[2:].split("|||")
            if len(fields) < 4:
                raise CorpusError(f"{path}:{line_no}: malformed A-line {line!r}")
            start_s, end_s = fields[0], fields[1]
            annotator_s = fields[-1]
            replacement = "|||".join(fields[2:-1])
            try:
                start, end, annotator = int(start_s), int(end_s), int(annotator_s)
            except ValueError as exc:
                raise CorpusError(f"{path}:{line_no}: malformed A-line {line!r}") from exc
            if start == -1 and end == -1 and replacement == "noop":
                noop_annotators.add(annotator)
                continue
            try:
                pending.setdefault(annotator, []).append(Edit(start, end, replacement))
            except EditValidationError as exc:
                raise CorpusError(f"{path}:{line_no}: {exc}") from exc
        else:
            raise CorpusError(f"{path}:{line_no}: unexpected line {line!r}")
    flush(len(lines) + 1)
    return entries


def write_references(path, entries: Iterable[ReferenceEntry]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(FORMAT_HEADER + "\n")
        for entry in entries:
            handle.write(f"S {entry.source}\n")
            for annotator, edit_set in zip(entry.annotator_ids, entry.annotators):
                if len(edit_set) == 0:
                    handle.write(f"A -1|||-1|||noop|||{annotator}\n")
                    continue
                for edit in edit_set:
                    handle.write(
                        f"A {edit.start}|||{edit.end}|||{edit.replacement}|||{annotator}\n"
                    )
            handle.write("\n")


@dataclass(frozen=True)
class OutputRecord:
    id: int
    source: str
    output: str | None
    strategy: str | None
    ppl: float | None
    capped: bool
    edits: tuple[Edit, ...] = ()
    error: str | None = None


def _escape_tsv(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _unescape_tsv(text: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            if nxt == "t":
                out.append("\t")
                i += 2
                continue
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            if nxt == "\\":
                out.append("\\")
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def _edits_payload(edits: Sequence[Edit]) -> list[dict]:
    return [
        {"start": e.start, "end": e.end, "replacement": e.replacement} for e in edits
    ]


def _record_to_json(record: OutputRecord) -> str:
    if record.error is not None:
        payload: dict = {"id": record.id, "source": record.source, "error": record.error}
    else:
        payload = {
            "id": record.id,
            "source": record.source,
            "output": record.output,
            "strategy": record.strategy,
            "ppl": record.ppl,
            "capped": record.capped,
            "edits": _edits_payload(record.edits),
        }
    return json.dumps(payload, ensure_ascii=False)


TSV_COLUMNS = ("id", "source", "output", "strategy", "ppl", "capped", "edits")


def _record_to_tsv(record: OutputRecord) -> str:
    if record.error is not None:
        fields = [
            str(record.id),
            _escape_tsv(record.source),
            "",
            "error",
            "",
            "",
            _escape_tsv(json.dumps({"error": record.error}, ensure_ascii=False)),
        ]
    else:
        fields = [
            str(record.id),
            _escape_tsv(record.source),
            _escape_tsv(record.output or ""),
            record.strategy or "",
            "" if record.ppl is None else repr(record.ppl),
            "true" if record.capped else "false",
            _escape_tsv(json.dumps(_edits_payload(record.edits), ensure_ascii=False)),
        ]
    return "\t".join(fields)


def write_outputs(
    records: Iterable[OutputRecord],
    path_or_handle,
    fmt: str = "jsonl",
    config: Mapping | None = None,
) -> None:
    """Write ensemble output records as JSONL or TSV with a config header."""
    if fmt not in ("jsonl", "tsv"):
        raise ValueError(f"unknown output format {fmt!r}")
    own = not isinstance(path_or_handle, io.TextIOBase)
    handle = (
        open(path_or_handle, "w", encoding="utf-8", newline="\n")
        if own
        else path_or_handle
    )
    try:
        handle.write(FORMAT_HEADER + "\n")
        if config is not None:
            handle.write(CONFIG_PREFIX + json.dumps(dict(config), ensure_ascii=False) + "\n")
        if fmt == "tsv":
            handle.write("# " + "\t".join(TSV_COLUMNS) + "\n")
        for record in records:
            line = _record_to_json(record) if fmt == "jsonl" else _record_to_tsv(record)
            handle.write(line + "\n")
    finally:
        if own:
            handle.close()


def _record_from_payload(payload: Mapping, where: str) -> OutputRecord:
    if "error" in payload:
        return OutputRecord(
            id=int(payload["id"]),
            source=payload["source"],
            output=None,
            strategy=None,
            ppl=None,
            capped=False,
            error=payload["error"],
        )
    try:
        edits = tuple(
            Edit(int(e["start"]), int(e["end"]), e["replacement"])
            for e in payload["edits"]
        )
        return OutputRecord(
            id=int(payload["id"]),
            source=payload["source"],
            output=payload["output"],
            strategy=payload["strategy"],
            ppl=None if payload["ppl"] is None else float(payload["ppl"]),
            capped=bool(payload["capped"]),
            edits=edits,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"{where}: malformed output record: {exc}") from exc


def read_outputs(path) -> tuple[dict | None, list[OutputRecord]]:
    """Read back an output file; returns (config echo or None, records)."""
    lines = _read_lines(path)
    config: dict | None = None
    records: list[OutputRecord] = []
    for line_no, line in enumerate(lines, start=1):
        if line.startswith(CONFIG_PREFIX):
            config = json.loads(line[len(CONFIG_PREFIX) :])
            continue
        if line.startswith("#") or line == "":
            continue
        where = f"{path}:{line_no}"
        if line.startswith("{"):
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: bad JSON: {exc}") from exc
            records.append(_record_from_payload(payload, where))
        else:
            fields = line.split("\t")
            if len(fields) != len(TSV_COLUMNS):
                raise CorpusError(
                    f"{where}: expected {len(TSV_COLUMNS)} TSV fields, got {len(fields)}"
                )
            rid, source, output, strategy, ppl, capped, edits_json = fields
            if strategy == "error":
                error = json.loads(_unescape_tsv(edits_json))["error"]
                records.append(
                    OutputRecord(
                        id=int(rid),
                        source=_unescape_tsv(source),
                        output=None,
                        strategy=None,
                        ppl=None,
                        capped=False,
                        error=error,
                    )
                )
                continue
            payload = {
                "id": int(rid),
                "source": _unescape_tsv(source),
                "output": _unescape_tsv(output),
                "strategy": strategy,
                "ppl": None if ppl == "" else float(ppl),
                "capped": capped == "true",
                "edits": json.loads(_unescape_tsv(edits_json)),
            }
            records.append(_record_from_payload(payload, where))
    return config, records
