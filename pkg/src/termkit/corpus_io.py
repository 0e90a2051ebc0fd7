"""Parallel corpus and bilingual term dictionary I/O.

A corpus is a pair of UTF-8 text files, one sentence per line, tokens
separated by single spaces.  A dictionary is a UTF-8 TSV file with rows
``source_term<TAB>target_term[<TAB>entry_id]``; lines starting with ``#``
are comments.  All text is expected to be pre-tokenized; this module never
tokenizes beyond splitting on whitespace.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import AlignmentError, FormatError, ValidationError

# A sentence or term is an immutable sequence of whitespace-free tokens.
Tokens = tuple[str, ...]


def tokenize(line: str) -> Tokens:
    """Split a line on runs of whitespace, dropping empty tokens."""
    return tuple(line.split())


@dataclass(frozen=True)
class SentencePair:
    """One aligned sentence pair; ``id`` is the 0-based line number at load time.

    ids are never renumbered by downstream filters, so they stay valid
    references to lines of the original files.
    """

    id: int
    source: Tokens
    target: Tokens


@dataclass(frozen=True)
class TermPair:
    """A single (source term, target term) dictionary entry."""

    source_term: Tokens
    target_term: Tokens
    dict_id: str | None = None

    def __post_init__(self) -> None:
        if not self.source_term or not self.target_term:
            raise ValidationError("term entries need at least one token on each side")

    @property
    def source_chars(self) -> int:
        """Character count of the source term, token separators excluded."""
        return sum(len(t) for t in self.source_term)

    @property
    def target_chars(self) -> int:
        """Character count of the target term, token separators excluded."""
        return sum(len(t) for t in self.target_term)

    @property
    def target_ngram(self) -> int:
        """Token length of the target term (the n of its n-gram)."""
        return len(self.target_term)


def term_sort_key(term: TermPair) -> tuple[int, str, str]:
    # Longest target first, so nested terms ("public officer" vs "officer")
    # are tried before their sub-terms; string keys make the order total.
    return (-term.target_chars, " ".join(term.target_term), " ".join(term.source_term))


@dataclass(frozen=True)
class TermDictionary:
    """Deduplicated term entries, longest target term first."""

    entries: tuple[TermPair, ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[TermPair]) -> "TermDictionary":
        seen: set[tuple[Tokens, Tokens]] = set()
        unique: list[TermPair] = []
        for pair in pairs:
            key = (pair.source_term, pair.target_term)
            if key in seen:
                continue
            seen.add(key)
            unique.append(pair)
        unique.sort(key=term_sort_key)
        return cls(tuple(unique))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def load_corpus(source_path: str | Path, target_path: str | Path) -> list[SentencePair]:
    """Load two aligned one-sentence-per-line files into SentencePairs.

    ids are assigned 0..n-1 in file order.  The two files must have the
    same number of lines and no empty lines.
    """
    src_lines = Path(source_path).read_text(encoding="utf-8").splitlines()
    tgt_lines = Path(target_path).read_text(encoding="utf-8").splitlines()
    if len(src_lines) != len(tgt_lines):
        first_unpaired = min(len(src_lines), len(tgt_lines)) + 1
        raise AlignmentError(
            f"{source_path} has {len(src_lines)} lines but {target_path} has "
            f"{len(tgt_lines)}: first unpaired line is {first_unpaired}"
        )
    pairs = []
    for i, (src, tgt) in enumerate(zip(src_lines, tgt_lines)):
        source, target = tokenize(src), tokenize(tgt)
        if not source:
            raise ValidationError(f"{source_path}: empty line {i + 1}")
        if not target:
            raise ValidationError(f"{target_path}: empty line {i + 1}")
        pairs.append(SentencePair(id=i, source=source, target=target))
    return pairs


def save_corpus(
    pairs: Sequence[SentencePair], source_path: str | Path, target_path: str | Path
) -> None:
    """Write pairs to two parallel text files, tokens joined by single spaces."""
    with open(source_path, "w", encoding="utf-8") as src_f, open(
        target_path, "w", encoding="utf-8"
    ) as tgt_f:
        for pair in pairs:
            src_f.write(" ".join(pair.source) + "\n")
            tgt_f.write(" ".join(pair.target) + "\n")


def load_dictionary(path: str | Path) -> TermDictionary:
    """Load a TSV term dictionary: ``source<TAB>target[<TAB>entry_id]``.

    Exact duplicate (source, target) rows collapse to one entry; the first
    row's entry_id wins.
    """
    pairs = []
    with open(path, encoding="utf-8") as f:
        for row_no, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise FormatError(
                    f"{path}: row {row_no} has {len(cols)} column(s), expected at least 2"
                )
            source, target = tokenize(cols[0]), tokenize(cols[1])
            if not source or not target:
                raise FormatError(f"{path}: row {row_no} has an empty term")
            dict_id = cols[2].strip() or None if len(cols) > 2 else None
            pairs.append(TermPair(source, target, dict_id))
    return TermDictionary.from_pairs(pairs)


def expand_dictionary(
    raw: Iterable[tuple[str | Sequence[str], Sequence[str | Sequence[str]]]],
) -> TermDictionary:
    """Build a dictionary from (source_term, list-of-target-terms) entries.

    A source with several translations yields one entry per (source, target)
    combination, so every attested pairing can be matched.
    """

    def as_tokens(term: str | Sequence[str]) -> Tokens:
        return tokenize(term) if isinstance(term, str) else tuple(term)

    pairs = []
    for source_raw, target_raws in raw:
        source = as_tokens(source_raw)
        if not target_raws:
            raise ValidationError(f"source term {source_raw!r} has no translations")
        for target_raw in target_raws:
            pairs.append(TermPair(source, as_tokens(target_raw)))
    return TermDictionary.from_pairs(pairs)


def filter_dictionary(
    dictionary: TermDictionary,
    min_chars: int = 4,
    max_ngram: int = 20,
    side: str = "target",
) -> TermDictionary:
    """Drop terms that are too short in characters or too long in tokens.

    The character rule counts letters only (token separators excluded) and
    by default applies to the target term; ``side`` may be "target",
    "source", or "both".  The n-gram cap always applies to the target term.
    Both bounds are inclusive: a 4-character term and a 20-gram survive the
    defaults.
    """
    if side not in ("target", "source", "both"):
        raise ValidationError(f"unknown filter side {side!r}")

    def keep(term: TermPair) -> bool:
        if term.target_ngram > max_ngram:
            return False
        if side in ("target", "both") and term.target_chars < min_chars:
            return False
        if side in ("source", "both") and term.source_chars < min_chars:
            return False
        return True

    return TermDictionary(tuple(t for t in dictionary.entries if keep(t)))


def filter_corpus_by_length(
    pairs: Sequence[SentencePair], max_tokens: int = 80
) -> list[SentencePair]:
    """Keep pairs where both sides have at most ``max_tokens`` tokens (inclusive)."""
    return [
        p for p in pairs if len(p.source) <= max_tokens and len(p.target) <= max_tokens
    ]
