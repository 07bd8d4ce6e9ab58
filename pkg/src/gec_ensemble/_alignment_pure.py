"""Pure-Python character alignment kernel.

Reference implementation of the unit-cost Levenshtein alignment used by
edit extraction. The compiled kernel in ``_alignment_fast`` implements the
same contract; both must produce identical op strings for any input.

Op string alphabet (one op per character, left to right):
  M  match       (consumes one source char and one hypothesis char)
  S  substitute  (consumes one of each, chars differ, cost 1)
  D  delete      (consumes one source char, cost 1)
  I  insert      (consumes one hypothesis char, cost 1)

Tie-breaking during backtrace is fixed so the result is a pure function of
the inputs: match is taken whenever available, then substitution, then
deletion, then insertion. Preferring the diagonal pushes edit operations as
far left in the source as minimality allows, and preferring substitution
keeps replacements as single spans instead of paired insert/delete runs.
"""

from __future__ import annotations


def align_ops(source: str, hypothesis: str) -> str:
    """Return the canonical minimal-cost op string aligning source to hypothesis."""
    n = len(source)
    m = len(hypothesis)
    if n == 0:
        return "I" * m
    if m == 0:
        return "D" * n

    width = m + 1
    dist = [0] * ((n + 1) * width)
    for j in range(width):
        dist[j] = j
    row = width
    for i in range(1, n + 1):
        dist[row] = i
        src_char = source[i - 1]
        prev = row - width
        for j in range(1, m + 1):
            best = dist[prev + j - 1] + (0 if src_char == hypothesis[j - 1] else 1)
            up = dist[prev + j] + 1
            if up < best:
                best = up
            left = dist[row + j - 1] + 1
            if left < best:
                best = left
            dist[row + j] = best
        row += width

    ops = []
    i, j = n, m
    while i > 0 or j > 0:
        cur = dist[i * width + j]
        if i > 0 and j > 0:
            diag = dist[(i - 1) * width + j - 1]
            if source[i - 1] == hypothesis[j - 1]:
                if diag == cur:
                    ops.append("M")
                    i -= 1
                    j -= 1
                    continue
            elif diag + 1 == cur:
                ops.append("S")
                i -= 1
                j -= 1
                continue
        if i > 0 and dist[(i - 1) * width + j] + 1 == cur:
            ops.append("D")
            i -= 1
            continue
        ops.append("I")
        j -= 1
    ops.reverse()
    return "".join(ops)


def distance(source: str, hypothesis: str) -> int:
    """Unit-cost Levenshtein distance (two-row rolling DP)."""
    n = len(source)
    m = len(hypothesis)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = list(range(m + 1))
    cur = [0] * (m + 1)
    for i in range(1, n + 1):
        cur[0] = i
        src_char = source[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1] + (0 if src_char == hypothesis[j - 1] else 1)
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            cur[j] = best
        prev, cur = cur, prev
    return prev[m]
