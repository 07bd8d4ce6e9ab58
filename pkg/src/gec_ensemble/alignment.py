"""Alignment kernel selection.

Prefers the compiled kernel when it was built, otherwise falls back to the
pure-Python one. Setting the environment variable GEC_ENSEMBLE_PURE_PYTHON
to a non-empty value forces the fallback (used by the benchmark and tests).
"""

from __future__ import annotations

import os

if os.environ.get("GEC_ENSEMBLE_PURE_PYTHON"):
    from gec_ensemble._alignment_pure import align_ops, distance

    KERNEL = "python"
else:
    try:
        from gec_ensemble._alignment_fast import align_ops, distance  # type: ignore[no-redef]

        KERNEL = "cython"
    except ImportError:
        from gec_ensemble._alignment_pure import align_ops, distance  # type: ignore[no-redef]

        KERNEL = "python"

__all__ = ["align_ops", "distance", "KERNEL"]
