"""termkit: terminology-aware parallel corpus processing and MT evaluation.

Matches bilingual term dictionaries against parallel corpora, produces
terminology-balanced data splits, generates span-corrupted target sequences,
computes the joint translation + span-prediction loss from supplied token
log-probabilities, and scores hypotheses for exact and partial term usage.
"""

__version__ = "0.1.0"

from .corpus_io import (
    SentencePair,
    TermDictionary,
    TermPair,
    expand_dictionary,
    filter_corpus_by_length,
    filter_dictionary,
    load_corpus,
    load_dictionary,
    save_corpus,
)
from .corrupter import CorruptedSequence, CorruptionConfig, corrupt, sample_span_length
from .matcher import (
    MatchedCorpus,
    MatchedSentence,
    TermAnnotation,
    build_matched_corpus,
    match_terms,
    read_matched_jsonl,
    write_matched_jsonl,
)
from .metrics import EvalInstance, aggregate_lsm2, lsm2, term_matched, term_usage
from .objective import (
    LogProbRecord,
    LossBreakdown,
    LossConfig,
    ssp_nll,
    total_loss,
    translation_nll,
)
from .splitter import (
    DuplicateReport,
    SplitConfig,
    SplitResult,
    bucketize,
    duplicate_check,
    split,
    unique_subset,
)
from .analytics import CorpusStats, corpus_stats, ngram_histogram, top_terms

__all__ = [
    "__version__",
    "SentencePair",
    "TermPair",
    "TermDictionary",
    "load_corpus",
    "save_corpus",
    "load_dictionary",
    "expand_dictionary",
    "filter_dictionary",
    "filter_corpus_by_length",
    "TermAnnotation",
    "MatchedSentence",
    "MatchedCorpus",
    "match_terms",
    "build_matched_corpus",
    "write_matched_jsonl",
    "read_matched_jsonl",
    "SplitConfig",
    "SplitResult",
    "DuplicateReport",
    "bucketize",
    "duplicate_check",
    "split",
    "unique_subset",
    "CorruptionConfig",
    "CorruptedSequence",
    "sample_span_length",
    "corrupt",
    "LogProbRecord",
    "LossConfig",
    "LossBreakdown",
    "translation_nll",
    "ssp_nll",
    "total_loss",
    "EvalInstance",
    "term_matched",
    "term_usage",
    "lsm2",
    "aggregate_lsm2",
    "CorpusStats",
    "corpus_stats",
    "top_terms",
    "ngram_histogram",
]
