# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
"""Compiled character alignment kernel.

Same contract and tie-breaking as ``_alignment_pure``; see that module for
the op-string specification. Kept dependency-free (libc only) so a failed
build cleanly falls back to the pure kernel.
"""

from libc.stdlib cimport free, malloc


def align_ops(str source, str hypothesis):
    """Return the canonical minimal-cost op string aligning source to hypothesis."""
    cdef Py_ssize_t n = len(source)
    cdef Py_ssize_t m = len(hypothesis)
    if n == 0:
        return "I" * m
    if m == 0:
        return "D" * n

    cdef Py_ssize_t width = m + 1
    cdef int *dist = <int *> malloc((n + 1) * width * sizeof(int))
    if dist == NULL:
        raise MemoryError()

    cdef Py_ssize_t i, j, row, prev
    cdef int best, up, left, diag, cur
    cdef Py_UCS4 src_char

    try:
        for j in range(width):
            dist[j] = <int> j
        row = width
        for i in range(1, n + 1):
            dist[row] = <int> i
            src_char = source[i - 1]
            prev = row - width
            for j in range(1, m + 1):
                best = dist[prev + j - 1] + (0 if src_char == <Py_UCS4> hypothesis[j - 1] else 1)
                up = dist[prev + j] + 1
                if up < best:
                    best = up
                left = dist[row + j - 1] + 1
                if left < best:
                    best = left
                dist[row + j] = best
            row += width

        ops = []
        i = n
        j = m
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
    finally:
        free(dist)
    ops.reverse()
    return "".join(ops)


def distance(str source, str hypothesis):
    """Unit-cost Levenshtein distance (two-row rolling DP)."""
    cdef Py_ssize_t n = len(source)
    cdef Py_ssize_t m = len(hypothesis)
    if n == 0:
        return m
    if m == 0:
        return n

    cdef int *prev = <int *> malloc((m + 1) * sizeof(int))
    cdef int *cur = <int *> malloc((m + 1) * sizeof(int))
    if prev == NULL or cur == NULL:
        if prev != NULL:
            free(prev)
        if cur != NULL:
            free(cur)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef int best
    cdef int *tmp
    cdef Py_UCS4 src_char
    cdef int result

    try:
        for j in range(m + 1):
            prev[j] = <int> j
        for i in range(1, n + 1):
            cur[0] = <int> i
            src_char = source[i - 1]
            for j in range(1, m + 1):
                best = prev[j - 1] + (0 if src_char == <Py_UCS4> hypothesis[j - 1] else 1)
                if prev[j] + 1 < best:
                    best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                cur[j] = best
            tmp = prev
            prev = cur
            cur = tmp
        result = prev[m]
    finally:
        free(prev)
        free(cur)
    return result
