"""Random span corruption of target sentences for masked span prediction data.

Span lengths follow a geometric distribution clamped to [min_span,
max_span]; spans are dropped onto the sentence at random without overlap
until a fixed fraction of its tokens is covered, the last span being
trimmed so the budget is hit exactly.  Each span is then rewritten as mask
tokens, as random vocabulary tokens, or left in place (but still marked as
a prediction target).
"""

from __future__ import annotations

import json
import random
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from .corpus_io import Tokens
from .errors import FormatError, ValidationError
from .seeding import derive_rng

REPLACE_KINDS = ("mask", "random", "keep")

# give up on rejection sampling after this many failed placements and fill
# free runs left to right instead
MAX_PLACEMENT_ATTEMPTS = 1000


@dataclass(frozen=True)
class CorruptionConfig:
    geometric_p: float = 0.2
    max_span: int = 10
    min_span: int = 1
    ratio: float = 0.5
    mask_token: str = "[MASK]"
    replace_probs: tuple[float, float, float] = (0.8, 0.1, 0.1)
    vocabulary: tuple[str, ...] = ()
    reserved_tokens: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.geometric_p < 1.0:
            raise ValidationError(f"geometric_p must be in (0, 1), got {self.geometric_p}")
        if not 1 <= self.min_span <= self.max_span:
            raise ValidationError(
                f"need 1 <= min_span <= max_span, got [{self.min_span}, {self.max_span}]"
            )
        if not 0.0 <= self.ratio <= 1.0:
            raise ValidationError(f"ratio must be in [0, 1], got {self.ratio}")
        if len(self.replace_probs) != 3 or any(p < 0 for p in self.replace_probs):
            raise ValidationError("replace_probs must be three non-negative numbers")
        if abs(sum(self.replace_probs) - 1.0) > 1e-9:
            raise ValidationError(
                f"replace_probs must sum to 1, got {sum(self.replace_probs)}"
            )

    def sampling_vocabulary(self) -> tuple[str, ...]:
        """Vocabulary for random replacement, minus mask and reserved tokens."""
        banned = {self.mask_token, *self.reserved_tokens}
        return tuple(t for t in self.vocabulary if t not in banned)


@dataclass(frozen=True)
class CorruptedSequence:
    original: Tokens
    corrupted: Tokens
    mask: tuple[int, ...]
    spans: tuple[tuple[int, int, str], ...]  # (start, length, kind)

    @property
    def n_masked(self) -> int:
        return sum(self.mask)


@lru_cache(maxsize=None)
def _cumulative_weights(p: float, lo: int, hi: int) -> tuple[float, ...]:
    q = 1.0 - p
    acc = 0.0
    cum = []
    for length in range(lo, hi + 1):
        acc += q ** (length - 1) * p
        cum.append(acc)
    return tuple(cum)


def sample_span_length(rng: random.Random, cfg: CorruptionConfig) -> int:
    """Draw a span length from the clamped, renormalized geometric distribution."""
    cum = _cumulative_weights(cfg.geometric_p, cfg.min_span, cfg.max_span)
    u = rng.random() * cum[-1]
    return cfg.min_span + bisect_right(cum, u, 0, len(cum) - 1)


def _mask_budget(ratio: float, length: int) -> int:
    # round half up; Python's round() would go to even
    return int(ratio * length + 0.5)


def corrupt(
    y: Sequence[str], cfg: CorruptionConfig, rng: random.Random
) -> CorruptedSequence:
    """Corrupt one token sequence, masking exactly round(ratio * len(y)) tokens.

    The span start is drawn uniformly over all positions and the span wraps
    past the end of the sentence onto its beginning, so every position has
    the same chance of being covered (a start restricted to where the whole
    span fits would starve the edges).  A wrapping span is recorded as its
    two contiguous pieces, which share one replacement kind.  Placements
    that would overlap an existing span are re-sampled; the last span is
    trimmed so the budget is hit exactly.
    """
    original = tuple(y)
    length = len(original)
    if length == 0:
        raise ValidationError("cannot corrupt an empty sentence")
    budget = _mask_budget(cfg.ratio, length)
    vocab = cfg.sampling_vocabulary()
    if cfg.replace_probs[1] > 0 and not vocab:
        raise ValidationError(
            "random replacement is enabled but the vocabulary is empty"
        )

    covered = [False] * length
    corrupted = list(original)
    pieces: list[tuple[int, int, str]] = []
    masked = 0
    attempts = 0

    def place(runs: list[tuple[int, int]]) -> None:
        nonlocal masked
        kind_draw = rng.random()
        if kind_draw < cfg.replace_probs[0]:
            kind = "mask"
        elif kind_draw < cfg.replace_probs[0] + cfg.replace_probs[1]:
            kind = "random"
        else:
            kind = "keep"
        for lo, n in runs:
            if kind == "mask":
                corrupted[lo : lo + n] = [cfg.mask_token] * n
            elif kind == "random":
                corrupted[lo : lo + n] = [
                    vocab[rng.randrange(len(vocab))] for _ in range(n)
                ]
            for t in range(lo, lo + n):
                covered[t] = True
            pieces.append((lo, n, kind))
            masked += n

    while masked < budget:
        if attempts >= MAX_PLACEMENT_ATTEMPTS:
            # fill the leftmost free run up to the remaining budget
            lo = covered.index(False)
            hi = lo
            while hi < length and not covered[hi] and hi - lo < budget - masked:
                hi += 1
            place([(lo, hi - lo)])
            continue
        span_len = min(sample_span_length(rng, cfg), budget - masked)
        start = rng.randrange(length)
        attempts += 1
        end = start + span_len
        if end <= length:
            runs = [(start, span_len)]
        else:
            runs = [(start, length - start), (0, end - length)]
        if any(any(covered[lo : lo + n]) for lo, n in runs):
            continue
        place(runs)

    pieces.sort()
    mask = tuple(1 if covered[t] else 0 for t in range(length))
    return CorruptedSequence(
        original=original, corrupted=tuple(corrupted), mask=mask, spans=tuple(pieces)
    )


def corrupt_sentences(
    items: Iterable[tuple[int, Tokens]], cfg: CorruptionConfig, threads: int = 1
) -> list[tuple[int, CorruptedSequence]]:
    """Corrupt (id, tokens) pairs, each from its own RNG stream keyed by id.

    Per-id streams make the output independent of processing order and
    thread count.
    """

    def one(item: tuple[int, Tokens]) -> tuple[int, CorruptedSequence]:
        sid, y = item
        return sid, corrupt(y, cfg, derive_rng(cfg.seed, f"corrupt:{sid}"))

    items = list(items)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, items))
    return [one(item) for item in items]


def corrupted_to_json(sid: int, cs: CorruptedSequence) -> dict:
    return {
        "id": sid,
        "y": list(cs.original),
        "y_tilde": list(cs.corrupted),
        "mask": list(cs.mask),
        "spans": [[start, length, kind] for start, length, kind in cs.spans],
    }


def write_corrupted_jsonl(
    results: Iterable[tuple[int, CorruptedSequence]], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for sid, cs in results:
            f.write(json.dumps(corrupted_to_json(sid, cs), ensure_ascii=False) + "\n")


def read_corrupted_jsonl(path: str | Path) -> list[tuple[int, CorruptedSequence]]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                cs = CorruptedSequence(
                    original=tuple(row["y"]),
                    corrupted=tuple(row["y_tilde"]),
                    mask=tuple(int(b) for b in row["mask"]),
                    spans=tuple(
                        (int(s), int(n), str(kind)) for s, n, kind in row["spans"]
                    ),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}: line {line_no}: {exc}") from exc
            out.append((int(row["id"]), cs))
    return out
