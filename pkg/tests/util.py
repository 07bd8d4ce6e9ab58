"""Shared fuzz generators and independent oracles for the test suite.

The oracles here are deliberately written from scratch (textbook
recursions, no reuse of package internals) so they stay independent of the
code paths they check.
"""

from __future__ import annotations

import random

from gec_ensemble.edits import extract_edits
from gec_ensemble.ensemble import EnsembleInput

CJK = (
    "的一是不了人我在有他这中大来上国个到说们为子和你地出道也时年得就那要下"
    "以生会自着去之过家学对可她里后小么心多天而能好都然没日于起还发成事只作"
)
ASCII = "abcdefghijklmnopqrstuvwxyz"
ALPHABET = CJK + ASCII


def random_sentence(rnd: random.Random, lo: int = 1, hi: int = 20) -> str:
    return "".join(rnd.choice(ALPHABET) for _ in range(rnd.randint(lo, hi)))


def mutate(rnd: random.Random, sentence: str, max_ops: int = 3) -> str:
    """Apply a few random character mutations (sub/insert/delete spans)."""
    text = sentence
    for _ in range(rnd.randint(0, max_ops)):
        kind = rnd.choice("sid")
        if kind == "s" and text:
            pos = rnd.randrange(len(text))
            text = text[:pos] + rnd.choice(ALPHABET) + text[pos + 1 :]
        elif kind == "i":
            pos = rnd.randint(0, len(text))
            ins = "".join(rnd.choice(ALPHABET) for _ in range(rnd.randint(1, 2)))
            text = text[:pos] + ins + text[pos:]
        elif kind == "d" and text:
            pos = rnd.randrange(len(text))
            span = rnd.randint(1, min(2, len(text) - pos))
            text = text[:pos] + text[pos + span :]
    return text


def fuzz_input(
    rnd: random.Random,
    n_systems: int = 4,
    lo: int = 4,
    hi: int = 18,
    max_ops: int = 3,
) -> EnsembleInput:
    source = random_sentence(rnd, lo, hi)
    systems = tuple(
        extract_edits(source, mutate(rnd, source, max_ops)) for _ in range(n_systems)
    )
    return EnsembleInput(source, systems)


def oracle_distance(a: str, b: str) -> int:
    """Independent O(n*m) Levenshtein distance (full-matrix textbook form)."""
    rows = len(a) + 1
    cols = len(b) + 1
    table = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        table[i][0] = i
    for j in range(cols):
        table[0][j] = j
    for i in range(1, rows):
        for j in range(1, cols):
            substitution = table[i - 1][j - 1] + (a[i - 1] != b[j - 1])
            table[i][j] = min(substitution, table[i - 1][j] + 1, table[i][j - 1] + 1)
    return table[-1][-1]


def oracle_combinations(source: str, groups) -> list[tuple[tuple[int, ...], str, int]]:
    """Recursively enumerate every one-candidate-per-group rewrite.

    Groups are processed right to left so earlier spans keep their indices;
    returns (index vector, sentence, applied edit count) in lexicographic
    index order, matching the order the product is defined in.
    """
    results: list[tuple[tuple[int, ...], str, int]] = []

    def recurse(pos: int, picks: tuple[int, ...]) -> None:
        if pos == len(groups):
            text = source
            applied = 0
            for group, pick in zip(reversed(groups), reversed(picks)):
                cand = group.candidates[pick]
                if not cand.is_noop:
                    text = text[: group.start] + cand.replacement + text[group.end :]
                    applied += 1
            results.append((picks, text, applied))
            return
        for choice in range(len(groups[pos].candidates)):
            recurse(pos + 1, picks + (choice,))

    recurse(0, ())
    return results


def oracle_combination_winner(source: str, groups, backend):
    """Pick the oracle's winner: lowest PPL, fewest edits, smallest index vector."""
    entries = oracle_combinations(source, groups)
    best = None
    best_key = None
    for picks, text, applied in entries:
        key = (backend.score(text), applied, picks)
        if best_key is None or key < best_key:
            best_key = key
            best = text
    return best, entries
