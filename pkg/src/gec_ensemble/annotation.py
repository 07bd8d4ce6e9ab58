"""Human-annotation workflow: sampling, sheets, tallying and agreement.

Sampling uses SplitMix64 (Steele, Lea and Flood's 64-bit generator with its
published constants) driving a partial Fisher-Yates shuffle, so a (seed, n,
corpus size) triple always selects the same ids, on any platform.

Sheet file format (UTF-8, one block per sample):

    ### sample <id>
    Input: <source sentence>
    <system name>: <output sentence>
    label:
    ...more system/label pairs...
    Reference: <reference sentence>
    ...one Reference line per annotator...

Annotators fill each "label:" line with one of E, G, O or W (case
insensitive) for the system output directly above it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

LABELS = ("E", "G", "O", "W")
RESERVED_NAMES = ("Input", "Reference", "label")

_MASK64 = (1 << 64) - 1


class SheetError(ValueError):
    """Malformed annotation sheet or label."""


class SplitMix64:
    """SplitMix64 PRNG; fixed constants, frozen for reproducible sampling."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4B7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Unbiased draw from [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        threshold = ((1 << 64) // bound) * bound
        while True:
            value = self.next_u64()
            if value < threshold:
                return value % bound


def sample_ids(count: int, n: int, seed: int) -> list[int]:
    """Deterministically pick n distinct 1-based ids out of count, sorted."""
    if n > count:
        raise ValueError(f"cannot sample {n} of {count} sentences")
    rng = SplitMix64(seed)
    ids = list(range(1, count + 1))
    for i in range(n):
        j = i + rng.below(count - i)
        ids[i], ids[j] = ids[j], ids[i]
    return sorted(ids[:n])


@dataclass(frozen=True)
class SheetEntry:
    sample_id: int
    source: str
    systems: tuple[str, ...]
    outputs: tuple[str, ...]
    labels: tuple[str | None, ...]
    references: tuple[str, ...]


def build_sheet(
    sources: Sequence[str],
    system_outputs: Mapping[str, Sequence[str]],
    references: Sequence[Sequence[str]],
    n: int,
    seed: int,
) -> list[SheetEntry]:
    """Select n samples and assemble unlabeled sheet entries."""
    systems = list(system_outputs)
    for name in systems:
        if name in RESERVED_NAMES or ":" in name:
            raise SheetError(f"system name {name!r} is reserved or contains ':'")
        if len(system_outputs[name]) != len(sources):
            raise SheetError(
                f"system {name!r} has {len(system_outputs[name])} outputs "
                f"for {len(sources)} sources"
            )
    if len(references) != len(sources):
        raise SheetError(f"{len(references)} reference rows for {len(sources)} sources")
    entries = []
    for sample_id in sample_ids(len(sources), n, seed):
        idx = sample_id - 1
        entries.append(
            SheetEntry(
                sample_id=sample_id,
                source=sources[idx],
                systems=tuple(systems),
                outputs=tuple(system_outputs[name][idx] for name in systems),
                labels=tuple(None for _ in systems),
                references=tuple(references[idx]),
            )
        )
    return entries


def write_sheet(path, entries: Iterable[SheetEntry]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("# gec-ensemble v1\n")
        for entry in entries:
            handle.write(f"### sample {entry.sample_id}\n")
            handle.write(f"Input: {entry.source}\n")
            for name, output, label in zip(entry.systems, entry.outputs, entry.labels):
                handle.write(f"{name}: {output}\n")
                handle.write("label:" + (f" {label}" if label else "") + "\n")
            for reference in entry.references:
                handle.write(f"Reference: {reference}\n")
            handle.write("\n")


def read_sheet(path) -> list[SheetEntry]:
    with open(path, encoding="utf-8", newline="") as handle:
        raw = handle.read()
    lines = raw.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    entries: list[SheetEntry] = []
    current: dict | None = None

    def flush(line_no: int) -> None:
        nonlocal current
        if current is None:
            return
        if current["pending"] is not None:
            raise SheetError(
                f"{path}:{line_no}: system line {current['pending']!r} without label line"
            )
        entries.append(
            SheetEntry(
                sample_id=current["id"],
                source=current["source"],
                systems=tuple(current["systems"]),
                outputs=tuple(current["outputs"]),
                labels=tuple(current["labels"]),
                references=tuple(current["references"]),
            )
        )
        current = None

    for line_no, line in enumerate(lines, start=1):
        if line == "# gec-ensemble v1" and not entries and current is None:
            continue
        if line == "":
            continue
        if line.startswith("### sample "):
            flush(line_no)
            try:
                sample_id = int(line[len("### sample ") :])
            except ValueError as exc:
                raise SheetError(f"{path}:{line_no}: bad sample header {line!r}") from exc
            current = {
                "id": sample_id,
                "source": None,
                "systems": [],
                "outputs": [],
                "labels": [],
                "references": [],
                "pending": None,
            }
            continue
        if current is None:
            raise SheetError(f"{path}:{line_no}: content before first sample header")
        if line.startswith("Input: "):
            current["source"] = line[len("Input: ") :]
        elif line.startswith("Reference: ") or line == "Reference:":
            current["references"].append(line[len("Reference: ") :])
        elif line.startswith("label:"):
            if current["pending"] is None:
                raise SheetError(f"{path}:{line_no}: label line without a system line")
            token = line[len("label:") :].strip()
            if token == "":
                current["labels"].append(None)
            else:
                label = token.upper()
                if label not in LABELS:
                    raise SheetError(
                        f"{path}:{line_no}: invalid label {token!r} "
                        f"(expected one of {', '.join(LABELS)})"
                    )
                current["labels"].append(label)
            current["pending"] = None
        else:
            if ": " not in line and not line.endswith(":"):
                raise SheetError(f"{path}:{line_no}: unrecognized line {line!r}")
            name, _, output = line.partition(": ")
            if name.endswith(":") and output == "":
                name = name[:-1]
            if current["pending"] is not None:
                raise SheetError(
                    f"{path}:{line_no}: system line {current['pending']!r} without label line"
                )
            current["systems"].append(name)
            current["outputs"].append(output)
            current["pending"] = name
    flush(len(lines) + 1)
    return entries


def tally(entries: Sequence[SheetEntry]) -> dict[str, dict[str, int]]:
    """Count E/G/O/W labels per system; every output must be labeled."""
    if not entries:
        raise SheetError("empty sheet")
    systems = entries[0].systems
    counts: dict[str, dict[str, int]] = {
        name: {label: 0 for label in LABELS} for name in systems
    }
    for entry in entries:
        if entry.systems != systems:
            raise SheetError(
                f"sample {entry.sample_id}: systems {entry.systems} differ from {systems}"
            )
        for name, label in zip(entry.systems, entry.labels):
            if label is None:
                raise SheetError(f"sample {entry.sample_id}: missing label for {name!r}")
            counts[name][label] += 1
    for name, bucket in counts.items():
        total = sum(bucket.values())
        if total != len(entries):
            raise SheetError(
                f"{name!r}: {total} labels for {len(entries)} samples"
            )
    return counts


def render_tally(counts: Mapping[str, Mapping[str, int]]) -> str:
    width = max(len(name) for name in counts)
    lines = [" " * width + "".join(f"{label:>6}" for label in LABELS)]
    for name, bucket in counts.items():
        lines.append(f"{name:<{width}}" + "".join(f"{bucket[label]:>6}" for label in LABELS))
    return "\n".join(lines)


def agreement(
    a: Sequence[SheetEntry], b: Sequence[SheetEntry]
) -> tuple[float, dict[tuple[str, str], int]]:
    """Observed agreement rate between two labeled copies of one sheet."""
    if [e.sample_id for e in a] != [e.sample_id for e in b]:
        raise SheetError("sheets cover different samples")
    confusion: dict[tuple[str, str], int] = {}
    matches = 0
    total = 0
    for ea, eb in zip(a, b):
        if ea.systems != eb.systems:
            raise SheetError(f"sample {ea.sample_id}: sheets list different systems")
        for la, lb in zip(ea.labels, eb.labels):
            if la is None or lb is None:
                raise SheetError(f"sample {ea.sample_id}: unlabeled output")
            confusion[(la, lb)] = confusion.get((la, lb), 0) + 1
            matches += la == lb
            total += 1
    if total == 0:
        raise SheetError("no labels to compare")
    return matches / total, confusion


def render_agreement(rate: float, confusion: Mapping[tuple[str, str], int]) -> str:
    total = sum(confusion.values())
    lines = [f"agreement: {rate:.4f} ({round(rate * total)}/{total} labels)"]
    lines.append("confusion (rows: first sheet, cols: second sheet)")
    lines.append("     " + "".join(f"{label:>6}" for label in LABELS))
    for row in LABELS:
        cells = "".join(f"{confusion.get((row, col), 0):>6}" for col in LABELS)
        lines.append(f"{row:<5}" + cells)
    return "\n".join(lines)
