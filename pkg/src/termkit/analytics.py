"""Descriptive statistics over a term-matched corpus: corpus-level counts,
most frequent terms, and the n-gram length histogram of matched terms."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import ValidationError
from .matcher import MatchedCorpus

HISTOGRAM_MAX_N = 20


@dataclass(frozen=True)
class CorpusStats:
    n_sentences: int
    avg_words_src: float
    avg_words_tgt: float
    n_terms: int  # annotation instances, counting repeats
    avg_terms_per_sent: float
    unique_terms_src: int
    unique_terms_tgt: int


def corpus_stats(mc: MatchedCorpus) -> CorpusStats:
    """Sentence, token, and matched-term counts for a matched corpus.

    Unique terms are counted per side over the distinct token sequences
    appearing in annotations; the two sides differ whenever one term
    translates into several forms.
    """
    if not mc.sentences:
        raise ValidationError("cannot compute stats for an empty corpus")
    n_sentences = len(mc.sentences)
    src_tokens = sum(len(ms.pair.source) for ms in mc.sentences)
    tgt_tokens = sum(len(ms.pair.target) for ms in mc.sentences)
    n_terms = 0
    src_forms = set()
    tgt_forms = set()
    for ms in mc.sentences:
        for ann in ms.annotations:
            n_terms += ann.count_in_sentence
            src_forms.add(ann.term.source_term)
            tgt_forms.add(ann.term.target_term)
    return CorpusStats(
        n_sentences=n_sentences,
        avg_words_src=src_tokens / n_sentences,
        avg_words_tgt=tgt_tokens / n_sentences,
        n_terms=n_terms,
        avg_terms_per_sent=n_terms / n_sentences,
        unique_terms_src=len(src_forms),
        unique_terms_tgt=len(tgt_forms),
    )


def top_terms(mc: MatchedCorpus, k: int) -> list[tuple[str, int]]:
    """The k most frequent target terms with their annotation-instance counts.

    Ties sort by the term string so the listing is deterministic.
    """
    if k < 1:
        raise ValidationError(f"k must be at least 1, got {k}")
    counts: Counter[str] = Counter()
    for ms in mc.sentences:
        for ann in ms.annotations:
            counts[" ".join(ann.term.target_term)] += ann.count_in_sentence
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def ngram_histogram(mc: MatchedCorpus) -> dict[int, int]:
    """Annotation-instance counts keyed by target term n-gram length.

    Bins 1..20 are always present (zero-filled) so the histogram plots with
    a fixed x-axis; longer bins appear only if such terms exist.
    """
    counts = {n: 0 for n in range(1, HISTOGRAM_MAX_N + 1)}
    for ms in mc.sentences:
        for ann in ms.annotations:
            counts[ann.target_ngram] = counts.get(ann.target_ngram, 0) + ann.count_in_sentence
    return counts


def write_stats_json(stats: CorpusStats, path: str | Path) -> None:
    payload = {
        "n_sentences": stats.n_sentences,
        "avg_words_src": stats.avg_words_src,
        "avg_words_tgt": stats.avg_words_tgt,
        "n_terms": stats.n_terms,
        "avg_terms_per_sent": stats.avg_terms_per_sent,
        "unique_terms_src": stats.unique_terms_src,
        "unique_terms_tgt": stats.unique_terms_tgt,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2)
        f.write("\n")


def write_top_terms_tsv(terms: list[tuple[str, int]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for term, count in terms:
            f.write(f"{term}\t{count}\n")


def write_histogram_csv(counts: dict[int, int], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("n,count\n")
        for n in sorted(counts):
            f.write(f"{n},{counts[n]}\n")
