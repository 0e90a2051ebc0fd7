"""Terminology-aware scoring of translation hypotheses.

Two scores are computed per reference term.  Exact usage: the term's target
tokens appear contiguously in the hypothesis, counted with consumption
(longest term first, tokens removed on a hit) so nested terms cannot claim
the same hypothesis tokens twice.  Partial overlap, for terms longer than
two tokens: the longest contiguous piece of the term found anywhere in the
raw hypothesis, normalized by term length, with overlaps shorter than two
tokens scoring zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .corpus_io import TermPair, Tokens, term_sort_key
from .errors import ValidationError
from .matcher import MatchedSentence, find_subsequence

LONG_TERM_MIN = 3  # shortest n-gram scored by the partial-overlap metric
MAX_TERM_NGRAM = 20


@dataclass(frozen=True)
class EvalInstance:
    """A hypothesis paired with its term-annotated reference."""

    hypothesis: Tokens
    reference: MatchedSentence


@dataclass
class BucketCount:
    matched: int = 0
    total: int = 0

    @property
    def rate(self) -> float | None:
        """Percent matched, or None for an empty bucket."""
        if self.total == 0:
            return None
        return 100.0 * self.matched / self.total


@dataclass
class TermUsageReport:
    """Exact term usage by n-gram bucket: unigrams, bigrams, longer terms."""

    per_bucket: dict[str, BucketCount]
    per_n: dict[int, BucketCount]  # n = 3..20, zero-filled

    @property
    def gt2_macro(self) -> float | None:
        """Unweighted mean of per-n rates over n-gram lengths with any terms."""
        rates = [c.rate for c in self.per_n.values() if c.total > 0]
        if not rates:
            return None
        return math.fsum(rates) / len(rates)


@dataclass
class LSMReport:
    """Partial-overlap scores for terms longer than two tokens, in [0, 1]."""

    gt2_micro: float | None
    gt2_macro: float | None
    per_instance: list[tuple[str, float]] = field(default_factory=list)

    @property
    def n_instances(self) -> int:
        return len(self.per_instance)


def term_matched(
    hyp_working: Sequence[str], term: TermPair
) -> tuple[bool, list[str]]:
    """Check for the term's target tokens in the working hypothesis.

    On a hit the leftmost occurrence is removed so later (shorter) terms
    cannot re-claim the same tokens; returns (matched, remaining tokens).
    """
    working = list(hyp_working)
    at = find_subsequence(working, term.target_term)
    if at < 0:
        return False, working
    return True, working[:at] + working[at + term.target_ngram :]


def _usage_hits(instance: EvalInstance) -> Iterator[tuple[TermPair, int, bool]]:
    """(term, n-gram length, hit) per annotation instance, with consumption."""
    working = list(instance.hypothesis)
    annotations = sorted(
        instance.reference.annotations, key=lambda a: term_sort_key(a.term)
    )
    for ann in annotations:
        for _ in range(ann.count_in_sentence):
            hit, working = term_matched(working, ann.term)
            yield ann.term, ann.target_ngram, hit


def term_usage(instances: Iterable[EvalInstance]) -> TermUsageReport:
    """Fraction of reference terms whose exact target form appears in the hypothesis.

    Counts pool into buckets by term length: unigrams ("1"), bigrams ("2"),
    and everything longer ("gt2", micro-pooled); per-length counts for the
    long bucket feed the macro average.
    """
    report = TermUsageReport(
        per_bucket={"1": BucketCount(), "2": BucketCount(), "gt2": BucketCount()},
        per_n={n: BucketCount() for n in range(LONG_TERM_MIN, MAX_TERM_NGRAM + 1)},
    )
    for instance in instances:
        for _term, n, hit in _usage_hits(instance):
            buckets = [report.per_bucket[str(n)]] if n <= 2 else [
                report.per_bucket["gt2"],
                report.per_n.setdefault(n, BucketCount()),
            ]
            for bucket in buckets:
                bucket.total += 1
                bucket.matched += int(hit)
    return report


def lsm2(hyp: Sequence[str], term: TermPair) -> float:
    """Longest contiguous piece of the term present in the hypothesis, over term length.

    Defined only for terms longer than two tokens; pieces must be at least
    two tokens long to count, so the score is either 0 or in [2/l, 1].
    """
    l = term.target_ngram
    if l <= 2:
        raise ValidationError(
            f"partial-overlap score is defined for terms of >2 tokens, got {l}"
        )
    hyp = list(hyp)
    target = list(term.target_term)
    for piece_len in range(l, 1, -1):
        for i in range(l - piece_len + 1):
            if find_subsequence(hyp, target[i : i + piece_len]) >= 0:
                return piece_len / l
    return 0.0


def aggregate_lsm2(instances: Iterable[EvalInstance]) -> LSMReport:
    """Partial-overlap scores pooled over all long-term annotation instances.

    Micro is the plain mean over instances; macro first averages within
    each n-gram length, then averages those means.  The hypothesis is read
    raw (no consumption).  With no long terms at all the report is empty
    rather than zero.
    """
    per_n_scores: dict[int, list[float]] = {}
    per_instance: list[tuple[str, float]] = []
    for instance in instances:
        for ann in instance.reference.annotations:
            n = ann.target_ngram
            if n < LONG_TERM_MIN:
                continue
            score = lsm2(instance.hypothesis, ann.term)
            for _ in range(ann.count_in_sentence):
                per_n_scores.setdefault(n, []).append(score)
                per_instance.append((" ".join(ann.term.target_term), score))
    if not per_instance:
        return LSMReport(gt2_micro=None, gt2_macro=None, per_instance=[])
    micro = math.fsum(score for _, score in per_instance) / len(per_instance)
    per_n_means = [math.fsum(v) / len(v) for _, v in sorted(per_n_scores.items())]
    macro = math.fsum(per_n_means) / len(per_n_means)
    return LSMReport(gt2_micro=micro, gt2_macro=macro, per_instance=per_instance)


def per_sentence_details(
    instances: Sequence[EvalInstance],
) -> Iterator[tuple[int, str, int, int, float | None]]:
    """(sentence id, term, n, exact hit, partial score) rows for error analysis.

    The partial score is None for terms of one or two tokens.
    """
    for instance in instances:
        sid = instance.reference.pair.id
        for term, n, hit in _usage_hits(instance):
            partial = lsm2(instance.hypothesis, term) if n >= LONG_TERM_MIN else None
            yield sid, " ".join(term.target_term), n, int(hit), partial


def usage_report_to_json(report: TermUsageReport) -> dict:
    return {
        "per_bucket": {
            key: {"matched": c.matched, "total": c.total, "rate": c.rate}
            for key, c in report.per_bucket.items()
        },
        "gt2_macro": report.gt2_macro,
        "per_n": {
            str(n): [c.matched, c.total] for n, c in sorted(report.per_n.items())
        },
    }


def lsm_report_to_json(report: LSMReport) -> dict:
    return {
        "gt2_micro": report.gt2_micro,
        "gt2_macro": report.gt2_macro,
        "n_instances": report.n_instances,
        "per_instance": [[term, score] for term, score in report.per_instance],
    }
