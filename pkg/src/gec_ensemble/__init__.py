"""Ensemble grammatical-error-correction system outputs.

Combines the corrections of several GEC systems over a shared source corpus
by threshold edit voting or by perplexity-guided selection (whole-sentence,
per-span, or full edit-combination search), with the edit extraction,
language-model scoring, evaluation and annotation-sampling machinery needed
to run and measure the pipeline end to end.
"""

__version__ = "0.1.0"

from gec_ensemble.alignment import KERNEL as ALIGNMENT_KERNEL
from gec_ensemble.edits import (
    Edit,
    EditSet,
    EditValidationError,
    apply_edits,
    extract_edits,
    validate_for_source,
)
from gec_ensemble.ensemble import (
    EnsembleInput,
    EnsembleOutput,
    RecordFailure,
    edit_combination,
    edit_level,
    run_corpus,
    sentence_level,
    vote,
)
from gec_ensemble.evaluation import (
    EvalCounts,
    Scores,
    corpus_scores,
    counts_to_scores,
    f_beta,
    match_sentence,
)
from gec_ensemble.grouping import SpanCandidate, SpanGroup, group_spans
from gec_ensemble.scoring import (
    ExternalScorer,
    NGramModel,
    ScoringError,
    perplexity,
    score,
    score_batch,
    train_ngram,
)

__all__ = [
    "ALIGNMENT_KERNEL",
    "Edit",
    "EditSet",
    "EditValidationError",
    "EnsembleInput",
    "EnsembleOutput",
    "EvalCounts",
    "ExternalScorer",
    "NGramModel",
    "RecordFailure",
    "Scores",
    "ScoringError",
    "SpanCandidate",
    "SpanGroup",
    "apply_edits",
    "corpus_scores",
    "counts_to_scores",
    "edit_combination",
    "edit_level",
    "extract_edits",
    "f_beta",
    "group_spans",
    "match_sentence",
    "perplexity",
    "run_corpus",
    "score",
    "score_batch",
    "sentence_level",
    "train_ngram",
    "validate_for_source",
    "vote",
    "__version__",
]
