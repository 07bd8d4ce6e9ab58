"""Edits over a source sentence: extraction, validation and application.

A sentence is a plain ``str`` and every index counts Unicode scalar values
(Python code points), never bytes. An edit replaces the half-open character
span [start, end) of the source with ``replacement``; insertions have
start == end and deletions have an empty replacement.
"""

from __future__ import annotations

from dataclasses import dataclass

from gec_ensemble.alignment import align_ops


class EditValidationError(ValueError):
    """Raised when an edit or edit set violates its structural contract."""


@dataclass(frozen=True, order=True)
class Edit:
    start: int
    end: int
    replacement: str

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise EditValidationError(f"invalid span in {self!r}: need 0 <= start <= end")

    @property
    def is_insertion(self) -> bool:
        return self.start == self.end


@dataclass(frozen=True)
class EditSet:
    """A sorted, pairwise non-overlapping set of edits for one sentence.

    Structural invariants (checked at construction):
      * every span lies within [0, source_len]
      * edits are sorted ascending by (start, end)
      * consecutive edits satisfy prev.end <= next.start
      * no two insertions share the same start
    """

    edits: tuple[Edit, ...]
    source_len: int

    def __post_init__(self) -> None:
        if self.source_len < 0:
            raise EditValidationError("source_len must be >= 0")
        prev: Edit | None = None
        for edit in self.edits:
            if edit.end > self.source_len:
                raise EditValidationError(
                    f"{edit!r} exceeds source length {self.source_len}"
                )
            if prev is not None:
                if (edit.start, edit.end) < (prev.start, prev.end):
                    raise EditValidationError(
                        f"{edit!r} is out of order after {prev!r}"
                    )
                if edit.start < prev.end:
                    raise EditValidationError(f"{edit!r} overlaps {prev!r}")
                if prev.is_insertion and edit.is_insertion and edit.start == prev.start:
                    raise EditValidationError(
                        f"two insertions at the same position: {prev!r}, {edit!r}"
                    )
            prev = edit

    @classmethod
    def from_edits(cls, edits, source_len: int) -> "EditSet":
        return cls(tuple(sorted(edits, key=lambda e: (e.start, e.end))), source_len)

    @classmethod
    def empty(cls, source_len: int) -> "EditSet":
        return cls((), source_len)

    def __len__(self) -> int:
        return len(self.edits)

    def __iter__(self):
        return iter(self.edits)


def validate_for_source(source: str, edit_set: EditSet) -> None:
    """Check an edit set against the actual sentence it claims to edit.

    Beyond the structural checks done at construction this verifies the
    length matches and that no edit is a stored no-op (a no-op candidate is
    only ever represented inside a span group, never in an edit set).
    """
    if edit_set.source_len != len(source):
        raise EditValidationError(
            f"edit set built for length {edit_set.source_len}, "
            f"sentence has length {len(source)}"
        )
    for edit in edit_set.edits:
        if source[edit.start : edit.end] == edit.replacement:
            raise EditValidationError(f"{edit!r} is a no-op on this sentence")


def extract_edits(source: str, hypothesis: str) -> EditSet:
    """Extract the canonical minimal edit set turning source into hypothesis.

    Character-level unit-cost Levenshtein alignment; among minimal-cost
    alignments the kernel prefers substitution over paired insert/delete and
    places edits as far left as possible. Adjacent non-match operations are
    merged into a single span edit, which makes the result unique.
    """
    ops = align_ops(source, hypothesis)
    edits: list[Edit] = []
    i = 0
    j = 0
    run_start = -1
    run_repl: list[str] = []
    for op in ops:
        if op == "M":
            if run_start >= 0:
                edits.append(Edit(run_start, i, "".join(run_repl)))
                run_start = -1
                run_repl = []
            i += 1
            j += 1
        else:
            if run_start < 0:
                run_start = i
            if op == "S":
                run_repl.append(hypothesis[j])
                i += 1
                j += 1
            elif op == "D":
                i += 1
            else:  # I
                run_repl.append(hypothesis[j])
                j += 1
    if run_start >= 0:
        edits.append(Edit(run_start, i, "".join(run_repl)))
    return EditSet(tuple(edits), len(source))


def apply_edits(source: str, edit_set: EditSet) -> str:
    """Apply an edit set to its source sentence and return the result."""
    if edit_set.source_len != len(source):
        raise EditValidationError(
            f"edit set built for length {edit_set.source_len}, "
            f"sentence has length {len(source)}"
        )
    parts: list[str] = []
    pos = 0
    for edit in edit_set.edits:
        parts.append(source[pos : edit.start])
        parts.append(edit.replacement)
        pos = edit.end
    parts.append(source[pos:])
    return "".join(parts)
