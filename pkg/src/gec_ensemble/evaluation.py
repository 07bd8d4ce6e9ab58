"""Character-level multi-reference evaluation: P, R and F0.5.

Hypothesis and reference edit sets are both canonicalized (re-extracted
from the sentence they produce) before matching, so scores do not depend on
how an edit set happened to be written down. Each sentence is scored
against the single annotator that flatters it most; corpus scores
micro-average the selected counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from gec_ensemble.edits import EditSet, apply_edits, extract_edits


@dataclass(frozen=True)
class EvalCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __add__(self, other: "EvalCounts") -> "EvalCounts":
        return EvalCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f_half: float


def f_beta(precision: float, recall: float, beta: float = 0.5) -> float:
    """F-beta; beta = 0.5 weights precision twice as heavily as recall."""
    if precision + recall == 0:
        return 0.0
    b2 = beta * beta
    return (1 + b2) * precision * recall / (b2 * precision + recall)


def counts_to_scores(counts: EvalCounts) -> Scores:
    """P/R/F0.5 with the empty-empty convention (nothing sought and nothing
    proposed counts as perfect, so untouched correct sentences do not poison
    corpus scores)."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 1.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 1.0
    return Scores(precision, recall, f_beta(precision, recall))


def _canonical(source: str, edit_set: EditSet) -> frozenset:
    produced = apply_edits(source, edit_set)
    return frozenset(
        (e.start, e.end, e.replacement) for e in extract_edits(source, produced)
    )


def match_sentence(
    source: str, hyp_edits: EditSet, refs: Sequence[EditSet]
) -> EvalCounts:
    """Count tp/fp/fn for one sentence against its best-matching annotator.

    Matching is exact (span, replacement) equality after canonicalization.
    Among annotators the one maximizing sentence F0.5 wins; ties go to the
    higher tp, then the lower annotator index.
    """
    if not refs:
        raise ValueError("need at least one reference edit set")
    hyp = _canonical(source, hyp_edits)
    best: tuple[float, int, int] | None = None
    best_counts: EvalCounts | None = None
    for idx, ref_edits in enumerate(refs):
        ref = _canonical(source, ref_edits)
        tp = len(hyp & ref)
        counts = EvalCounts(tp=tp, fp=len(hyp) - tp, fn=len(ref) - tp)
        key = (counts_to_scores(counts).f_half, tp, -idx)
        if best is None or key > best:
            best = key
            best_counts = counts
    assert best_counts is not None
    return best_counts


def corpus_scores(per_sentence: Iterable[EvalCounts]) -> Scores:
    """Micro-average: sum counts over the corpus, then compute P/R/F0.5."""
    total = EvalCounts()
    for counts in per_sentence:
        total = total + counts
    return counts_to_scores(total)
