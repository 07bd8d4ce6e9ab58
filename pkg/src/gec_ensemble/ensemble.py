"""Ensemble strategies over one source sentence and N systems' edit sets.

Four strategies are provided:

  * vote            - keep edits proposed by at least T systems
  * sentence_level  - pick the lowest-perplexity sentence among the source
                      and each system's full output
  * edit_level      - pick the lowest-perplexity candidate independently
                      per span group, then combine the winners
  * edit_combination - enumerate one candidate per span group (the full
                      Cartesian product), score every resulting sentence and
                      keep the best; sentences whose product exceeds the cap
                      are passed through unchanged (or handed to edit_level
                      when configured)

All tie-breaking on equal perplexity is deterministic and biased toward
leaving the source alone, since precision-weighted evaluation punishes
over-correction more than under-correction.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from math import prod
from typing import Iterable, Sequence

from gec_ensemble.alignment import distance
from gec_ensemble.edits import Edit, EditSet, apply_edits, extract_edits, validate_for_source
from gec_ensemble.grouping import SpanGroup, group_spans
from gec_ensemble.scoring import Scorer

VOTE = "vote"
SENTENCE_LEVEL = "sentence_level"
EDIT_LEVEL = "edit_level"
EDIT_COMBINATION = "edit_combination"
STRATEGIES = (VOTE, SENTENCE_LEVEL, EDIT_LEVEL, EDIT_COMBINATION)

DEFAULT_COMBINATION_CAP = 300


@dataclass(frozen=True)
class EnsembleInput:
    source: str
    systems: tuple[EditSet, ...]

    def __post_init__(self) -> None:
        if len(self.systems) < 2:
            raise ValueError(f"need at least 2 systems, got {len(self.systems)}")
        for edit_set in self.systems:
            validate_for_source(self.source, edit_set)


@dataclass(frozen=True)
class EnsembleOutput:
    final: str
    chosen_edits: EditSet
    strategy: str
    ppl: float | None
    capped: bool = False


@dataclass(frozen=True)
class RecordFailure:
    index: int
    error: str


def _score_unique(backend: Scorer, texts: Sequence[str]) -> dict[str, float]:
    """Score each distinct sentence once (selection-neutral deduplication)."""
    unique = list(dict.fromkeys(texts))
    ppls = backend.score_batch(unique)
    return dict(zip(unique, ppls))


def vote(inp: EnsembleInput, threshold: int) -> EnsembleOutput:
    """Keep every edit proposed by at least ``threshold`` systems.

    Edit identity is the merged span plus the exact replacement string. If
    several candidates on the same merged span survive, the one backed by
    more systems wins (ties fall to the lexicographically smaller
    replacement, and competing survivors never span different groups since
    groups are disjoint).
    """
    n = len(inp.systems)
    if not 1 <= threshold <= n:
        raise ValueError(f"threshold must be in [1, {n}], got {threshold}")
    chosen: list[Edit] = []
    for group in group_spans(inp.source, inp.systems):
        best: tuple[int, str] | None = None
        for cand in group.candidates:
            if cand.is_noop or cand.proposer_count < threshold:
                continue
            key = (-cand.proposer_count, cand.replacement)
            if best is None or key < best:
                best = key
        if best is not None:
            chosen.append(Edit(group.start, group.end, best[1]))
    edit_set = EditSet(tuple(chosen), len(inp.source))
    return EnsembleOutput(
        final=apply_edits(inp.source, edit_set),
        chosen_edits=edit_set,
        strategy=VOTE,
        ppl=None,
    )


def sentence_level(inp: EnsembleInput, backend: Scorer) -> EnsembleOutput:
    """Choose the lowest-perplexity sentence among source and system outputs.

    The source is always in the pool, so this strategy can decline to
    correct. Ties prefer the source, then the candidate made of fewer
    edits, then the earliest system.
    """
    pool: dict[str, tuple[int, int, int]] = {inp.source: (0, 0, -1)}
    for sys_idx, edit_set in enumerate(inp.systems):
        text = apply_edits(inp.source, edit_set)
        key = (1, len(edit_set), sys_idx)
        if text not in pool or key < pool[text]:
            pool[text] = key
    ppls = _score_unique(backend, list(pool))
    winner = min(pool, key=lambda text: (ppls[text], pool[text]))
    return EnsembleOutput(
        final=winner,
        chosen_edits=extract_edits(inp.source, winner),
        strategy=SENTENCE_LEVEL,
        ppl=ppls[winner],
    )


def _best_candidate(group: SpanGroup, ppls: dict[str, float], source: str):
    def key(cand):
        sentence = group.apply_single(source, cand)
        changed = 0 if cand.is_noop else distance(group.source_text, cand.replacement)
        return (ppls[sentence], 0 if cand.is_noop else 1, changed, cand.replacement)

    return min(group.candidates, key=key)


def edit_level(inp: EnsembleInput, backend: Scorer) -> EnsembleOutput:
    """Pick each span group's best candidate independently, then combine.

    Every candidate is judged by the perplexity of the source with only
    that single candidate applied. Ties prefer the no-op, then the
    candidate changing fewer characters, then the lexicographically
    smaller replacement. Group order is irrelevant: groups are scored
    independently.
    """
    groups = group_spans(inp.source, inp.systems)
    sentences = [inp.source]
    for group in groups:
        for cand in group.candidates:
            sentences.append(group.apply_single(inp.source, cand))
    ppls = _score_unique(backend, sentences)

    chosen: list[Edit] = []
    for group in groups:
        best = _best_candidate(group, ppls, inp.source)
        if not best.is_noop:
            chosen.append(Edit(group.start, group.end, best.replacement))
    edit_set = EditSet(tuple(chosen), len(inp.source))
    final = apply_edits(inp.source, edit_set)
    final_ppl = ppls.get(final)
    if final_ppl is None:
        final_ppl = backend.score(final)
    return EnsembleOutput(
        final=final, chosen_edits=edit_set, strategy=EDIT_LEVEL, ppl=final_ppl
    )


def enumerate_combinations(
    source: str, groups: Sequence[SpanGroup]
) -> list[tuple[tuple[int, ...], str, int]]:
    """Every one-candidate-per-group rewrite of the source.

    Returns (candidate index vector, sentence, applied edit count) tuples
    in lexicographic index order; with no groups the single empty
    combination yields the source itself.
    """
    combos: list[tuple[tuple[int, ...], str, int]] = []
    for picks in itertools.product(*(range(group.size) for group in groups)):
        edits = [
            Edit(group.start, group.end, group.candidates[pick].replacement)
            for group, pick in zip(groups, picks)
            if not group.candidates[pick].is_noop
        ]
        sentence = apply_edits(source, EditSet(tuple(edits), len(source)))
        combos.append((picks, sentence, len(edits)))
    return combos


def edit_combination(
    inp: EnsembleInput,
    backend: Scorer,
    cap: int = DEFAULT_COMBINATION_CAP,
    cap_fallback: str = "none",
) -> EnsembleOutput:
    """Enumerate one candidate per span group and keep the best sentence.

    The number of combinations is the product of the group sizes (no-op
    candidates included), counted before any deduplication of identical
    sentences. Above ``cap`` the sentence is passed through unchanged with
    ``capped=True``, or handed to edit_level when cap_fallback is
    "edit-level". Ties prefer fewer applied edits, then the
    lexicographically smallest combination index vector.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    if cap_fallback not in ("none", "edit-level"):
        raise ValueError(f"unknown cap_fallback {cap_fallback!r}")
    groups = group_spans(inp.source, inp.systems)
    total = prod(group.size for group in groups)
    if total > cap:
        if cap_fallback == "edit-level":
            return replace(edit_level(inp, backend), strategy=EDIT_COMBINATION, capped=True)
        return EnsembleOutput(
            final=inp.source,
            chosen_edits=EditSet.empty(len(inp.source)),
            strategy=EDIT_COMBINATION,
            ppl=None,
            capped=True,
        )

    combos = enumerate_combinations(inp.source, groups)
    ppls = _score_unique(backend, [sentence for _, sentence, _ in combos])
    best_picks, best_sentence, _ = min(
        combos, key=lambda item: (ppls[item[1]], item[2], item[0])
    )
    chosen = EditSet(
        tuple(
            Edit(group.start, group.end, group.candidates[pick].replacement)
            for group, pick in zip(groups, best_picks)
            if not group.candidates[pick].is_noop
        ),
        len(inp.source),
    )
    return EnsembleOutput(
        final=best_sentence,
        chosen_edits=chosen,
        strategy=EDIT_COMBINATION,
        ppl=ppls[best_sentence],
    )


def _run_one(
    strategy: str,
    inp: EnsembleInput,
    backend: Scorer | None,
    threshold: int,
    cap: int,
    cap_fallback: str,
) -> EnsembleOutput:
    if strategy == VOTE:
        return vote(inp, threshold)
    if backend is None:
        raise ValueError(f"strategy {strategy} needs a scoring backend")
    if strategy == SENTENCE_LEVEL:
        return sentence_level(inp, backend)
    if strategy == EDIT_LEVEL:
        return edit_level(inp, backend)
    if strategy == EDIT_COMBINATION:
        return edit_combination(inp, backend, cap=cap, cap_fallback=cap_fallback)
    raise ValueError(f"unknown strategy {strategy!r}")


def run_corpus(
    strategy: str,
    inputs: Iterable[EnsembleInput],
    backend: Scorer | None = None,
    *,
    threshold: int = 2,
    cap: int = DEFAULT_COMBINATION_CAP,
    cap_fallback: str = "none",
    jobs: int = 1,
    capture_errors: bool = False,
) -> list[EnsembleOutput | RecordFailure]:
    """Run one strategy over a corpus, preserving input order.

    Sentences are independent; with jobs > 1 they are scored in a thread
    pool, which changes nothing about the outputs. With capture_errors a
    failing record becomes a RecordFailure instead of aborting the run.
    """
    items = list(inputs)

    def one(pair: tuple[int, EnsembleInput]) -> EnsembleOutput | RecordFailure:
        index, inp = pair
        if not capture_errors:
            return _run_one(strategy, inp, backend, threshold, cap, cap_fallback)
        try:
            return _run_one(strategy, inp, backend, threshold, cap, cap_fallback)
        except Exception as exc:  # noqa: BLE001 - per-record fault barrier
            return RecordFailure(index=index, error=str(exc))

    if jobs <= 1:
        return [one(pair) for pair in enumerate(items)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, enumerate(items)))
