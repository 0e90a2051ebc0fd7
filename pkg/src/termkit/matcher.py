"""Dictionary term matching over sentence pairs.

Entries are tried longest-target-first.  When an entry's target tokens
appear contiguously in the target sentence and its source tokens appear
contiguously in the source sentence, the leftmost occurrence on each side
is removed from a working copy before the next entry is tried.  This
consume-on-match rule keeps sub-terms from matching inside tokens already
claimed by a longer term: given both "public officer" and "officer" in the
dictionary, a sentence containing "public officer" annotates only the
longer entry.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .corpus_io import SentencePair, TermDictionary, TermPair, Tokens
from .errors import FormatError, ValidationError


@dataclass(frozen=True)
class TermAnnotation:
    """One dictionary entry found in a sentence, with its occurrence count."""

    term: TermPair
    count_in_sentence: int = 1

    @property
    def target_ngram(self) -> int:
        return self.term.target_ngram


@dataclass(frozen=True)
class MatchedSentence:
    """A sentence pair with at least one matched term."""

    pair: SentencePair
    annotations: tuple[TermAnnotation, ...]

    def __post_init__(self) -> None:
        if not self.annotations:
            raise ValidationError("a matched sentence needs at least one annotation")

    @property
    def max_ngram(self) -> int:
        """Token length of the longest matched target term."""
        return max(a.target_ngram for a in self.annotations)

    @property
    def n_term_instances(self) -> int:
        return sum(a.count_in_sentence for a in self.annotations)


@dataclass(frozen=True)
class MatchedCorpus:
    """All sentences of a corpus that contain at least one dictionary term."""

    sentences: tuple[MatchedSentence, ...]
    dictionary: TermDictionary


def find_subsequence(haystack: Sequence[str], needle: Sequence[str]) -> int:
    """Index of the leftmost contiguous occurrence of needle, or -1."""
    n, m = len(haystack), len(needle)
    if m == 0 or m > n:
        return -1
    needle = list(needle)
    first = needle[0]
    for i in range(n - m + 1):
        if haystack[i] == first and list(haystack[i : i + m]) == needle:
            return i
    return -1


def _fold_fn(casefold: bool) -> Callable[[str], str]:
    return str.casefold if casefold else (lambda t: t)


def _prepare_entries(
    dictionary: TermDictionary, fold: Callable[[str], str]
) -> list[tuple[int, list[str], list[str]]]:
    return [
        (i, [fold(t) for t in e.source_term], [fold(t) for t in e.target_term])
        for i, e in enumerate(dictionary.entries)
    ]


def _match_prepared(
    pair: SentencePair,
    dictionary: TermDictionary,
    prepared: list[tuple[int, list[str], list[str]]],
    fold: Callable[[str], str],
    multi_pass: bool,
) -> MatchedSentence | None:
    work_src = [fold(t) for t in pair.source]
    work_tgt = [fold(t) for t in pair.target]
    # Vocab sets of the original sentence let most entries be skipped without
    # a scan; consumption only removes tokens, so they stay safe supersets.
    src_vocab = set(work_src)
    tgt_vocab = set(work_tgt)

    counts: dict[int, int] = {}
    first_match_order: list[int] = []
    while True:
        matched_this_pass = False
        for idx, src_needle, tgt_needle in prepared:
            if tgt_needle[0] not in tgt_vocab or src_needle[0] not in src_vocab:
                continue
            tgt_at = find_subsequence(work_tgt, tgt_needle)
            if tgt_at < 0:
                continue
            src_at = find_subsequence(work_src, src_needle)
            if src_at < 0:
                continue
            del work_tgt[tgt_at : tgt_at + len(tgt_needle)]
            del work_src[src_at : src_at + len(src_needle)]
            if idx not in counts:
                counts[idx] = 0
                first_match_order.append(idx)
            counts[idx] += 1
            matched_this_pass = True
        if not (multi_pass and matched_this_pass):
            break

    if not first_match_order:
        return None
    annotations = tuple(
        TermAnnotation(dictionary.entries[i], counts[i]) for i in first_match_order
    )
    return MatchedSentence(pair=pair, annotations=annotations)


def match_terms(
    pair: SentencePair,
    dictionary: TermDictionary,
    casefold: bool = False,
    multi_pass: bool = False,
) -> MatchedSentence | None:
    """Annotate one sentence pair with the dictionary entries it contains.

    Each entry is matched at most once per pass over the dictionary; with
    ``multi_pass`` the scan repeats until no further entry matches, so
    repeated occurrences accumulate in ``count_in_sentence``.  Returns None
    when nothing matches.
    """
    fold = _fold_fn(casefold)
    prepared = _prepare_entries(dictionary, fold)
    return _match_prepared(pair, dictionary, prepared, fold, multi_pass)


def build_matched_corpus(
    corpus: Sequence[SentencePair],
    dictionary: TermDictionary,
    casefold: bool = False,
    multi_pass: bool = False,
    threads: int = 1,
) -> MatchedCorpus:
    """Match every pair and keep only sentences containing at least one term.

    Corpus order is preserved.  Sentences are independent, so the work may
    be sharded over threads; results are assembled in input order either
    way.
    """
    fold = _fold_fn(casefold)
    prepared = _prepare_entries(dictionary, fold)

    def one(pair: SentencePair) -> MatchedSentence | None:
        return _match_prepared(pair, dictionary, prepared, fold, multi_pass)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, corpus))
    else:
        results = [one(pair) for pair in corpus]
    return MatchedCorpus(
        sentences=tuple(ms for ms in results if ms is not None),
        dictionary=dictionary,
    )


def matched_sentence_to_json(ms: MatchedSentence) -> dict:
    return {
        "id": ms.pair.id,
        "src": list(ms.pair.source),
        "tgt": list(ms.pair.target),
        "terms": [
            {
                "src": list(a.term.source_term),
                "tgt": list(a.term.target_term),
                "l": a.target_ngram,
                "count": a.count_in_sentence,
            }
            for a in ms.annotations
        ],
        "max_ngram": ms.max_ngram,
    }


def write_matched_jsonl(mc: MatchedCorpus, path: str | Path) -> None:
    """Write one JSON object per matched sentence."""
    with open(path, "w", encoding="utf-8") as f:
        for ms in mc.sentences:
            f.write(json.dumps(matched_sentence_to_json(ms), ensure_ascii=False) + "\n")


def read_matched_jsonl(path: str | Path) -> MatchedCorpus:
    """Read a matched corpus back from JSONL.

    The dictionary travels implicitly as the set of annotated terms; it is
    rebuilt (deduplicated and re-sorted) from them.
    """
    sentences = []
    terms: list[TermPair] = []
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                pair = SentencePair(
                    id=int(row["id"]),
                    source=tuple(row["src"]),
                    target=tuple(row["tgt"]),
                )
                annotations = []
                for t in row["terms"]:
                    term = TermPair(tuple(t["src"]), tuple(t["tgt"]))
                    if term.target_ngram != int(t["l"]):
                        raise FormatError(
                            f"{path}: line {line_no}: length field {t['l']} does not "
                            f"match target term of {term.target_ngram} token(s)"
                        )
                    annotations.append(TermAnnotation(term, int(t["count"])))
                    terms.append(term)
                ms = MatchedSentence(pair=pair, annotations=tuple(annotations))
                if "max_ngram" in row and int(row["max_ngram"]) != ms.max_ngram:
                    raise FormatError(
                        f"{path}: line {line_no}: stored max_ngram {row['max_ngram']} "
                        f"disagrees with recomputed {ms.max_ngram}"
                    )
            except (KeyError, TypeError, ValueError) as exc:
                if isinstance(exc, FormatError):
                    raise
                raise FormatError(f"{path}: line {line_no}: {exc}") from exc
            sentences.append(ms)
    return MatchedCorpus(
        sentences=tuple(sentences), dictionary=TermDictionary.from_pairs(terms)
    )


def iter_matched_targets(mc: MatchedCorpus) -> Iterable[tuple[int, Tokens]]:
    """(id, target tokens) pairs, the shape the corrupter consumes."""
    for ms in mc.sentences:
        yield ms.pair.id, ms.pair.target
