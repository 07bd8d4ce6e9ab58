"""Group competing edits from multiple systems into per-span candidate sets.

Edits whose spans overlap (or that are insertions at the same position) are
merged by transitive closure into one group covering the union hull of the
member spans. Each member edit is then re-expressed as a full replacement
of the merged span, and the unchanged span text is added as the explicit
no-op candidate, so every group offers a complete, comparable menu of
rewrites for one stretch of the source.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gec_ensemble.edits import Edit, EditSet, validate_for_source


@dataclass(frozen=True)
class SpanCandidate:
    """One candidate replacement for a merged span.

    ``proposers`` holds the indices of the systems backing this candidate;
    for the no-op candidate it holds the systems that propose no edit at
    all on the span.
    """

    replacement: str
    proposers: frozenset[int]
    is_noop: bool

    @property
    def proposer_count(self) -> int:
        return len(self.proposers)


@dataclass(frozen=True)
class SpanGroup:
    """All candidate rewrites proposed for one merged source span.

    Candidates are deduplicated by replacement string; the no-op candidate
    is always first, followed by the proposed alternatives in lexicographic
    order (this ordering is load-bearing: combination enumeration indexes
    into it).
    """

    start: int
    end: int
    source_text: str
    candidates: tuple[SpanCandidate, ...]

    @property
    def size(self) -> int:
        return len(self.candidates)

    def apply_single(self, source: str, candidate: SpanCandidate) -> str:
        """Source with only this group rewritten to the given candidate."""
        if candidate.is_noop:
            return source
        return source[: self.start] + candidate.replacement + source[self.end :]


def _connected(a: Edit, b: Edit) -> bool:
    # Strict interval overlap, plus the special case of two insertions
    # anchored at the same position. Spans that merely touch stay separate.
    if a.start < b.end and b.start < a.end:
        return True
    return a.start == a.end == b.start == b.end


def group_spans(source: str, systems: Sequence[EditSet]) -> list[SpanGroup]:
    """Partition all systems' edits into disjoint, sorted span groups."""
    for edit_set in systems:
        validate_for_source(source, edit_set)

    members: list[tuple[int, Edit]] = [
        (sys_idx, edit) for sys_idx, edit_set in enumerate(systems) for edit in edit_set
    ]
    parent = list(range(len(members)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in range(len(members)):
        for b in range(a + 1, len(members)):
            if _connected(members[a][1], members[b][1]):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra

    buckets: dict[int, list[tuple[int, Edit]]] = {}
    for idx, item in enumerate(members):
        buckets.setdefault(find(idx), []).append(item)

    all_systems = frozenset(range(len(systems)))
    groups: list[SpanGroup] = []
    for bucket in buckets.values():
        start = min(edit.start for _, edit in bucket)
        end = max(edit.end for _, edit in bucket)
        noop_text = source[start:end]
        by_replacement: dict[str, set[int]] = {}
        for sys_idx, edit in bucket:
            rewritten = (
                source[start : edit.start] + edit.replacement + source[edit.end : end]
            )
            by_replacement.setdefault(rewritten, set()).add(sys_idx)
        silent = all_systems - {sys_idx for sys_idx, _ in bucket}
        candidates = [SpanCandidate(noop_text, frozenset(silent), True)]
        for replacement in sorted(by_replacement):
            candidates.append(
                SpanCandidate(replacement, frozenset(by_replacement[replacement]), False)
            )
        groups.append(SpanGroup(start, end, noop_text, tuple(candidates)))

    groups.sort(key=lambda g: (g.start, g.end))
    return groups
