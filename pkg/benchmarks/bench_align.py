#!/usr/bin/env python3
"""Benchmark the compiled alignment kernel against the pure-Python one.

Edit extraction is the hot loop of every corpus run (each sentence is
aligned once per system, and again inside evaluation), so this is the
number that decides whether the extension pays for itself.

    python benchmarks/bench_align.py [--pairs 2000] [--min-len 10] [--max-len 60]
"""

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from util import mutate, random_sentence

from gec_ensemble import _alignment_pure as pure

try:
    from gec_ensemble import _alignment_fast as fast
except ImportError:
    fast = None


def run(kernel, pairs):
    start = time.perf_counter()
    checksum = 0
    for source, hyp in pairs:
        checksum += len(kernel.align_ops(source, hyp))
    elapsed = time.perf_counter() - start
    return elapsed, checksum


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--min-len", type=int, default=10)
    parser.add_argument("--max-len", type=int, default=60)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rnd = random.Random(args.seed)
    pairs = []
    for _ in range(args.pairs):
        source = random_sentence(rnd, args.min_len, args.max_len)
        pairs.append((source, mutate(rnd, source, 6)))

    py_time, py_sum = run(pure, pairs)
    print(f"pure python : {args.pairs / py_time:10.0f} pairs/s  ({py_time:.3f}s)")
    if fast is None:
        print("compiled    : not built (install with the extension to compare)")
        return 0
    cy_time, cy_sum = run(fast, pairs)
    if cy_sum != py_sum:
        print("kernel outputs disagree, refusing to report", file=sys.stderr)
        return 1
    print(f"compiled    : {args.pairs / cy_time:10.0f} pairs/s  ({cy_time:.3f}s)")
    print(f"speedup     : {py_time / cy_time:10.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
