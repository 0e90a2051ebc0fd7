"""Terminology-aware train/valid/test splitting.

Sentences are bucketed by the longest term n-gram they contain, buckets are
processed longest-first, and each bucket is spread over the three splits in
proportion to the requested global sizes, so every split sees the same
n-gram mix.  Duplicate target sentences are either kept together in a
single split (``grouped``, the default, which makes the test set leakage
free) or spread across splits like any other sentence (``paper``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .corpus_io import Tokens
from .errors import ValidationError
from .matcher import MatchedCorpus, MatchedSentence, write_matched_jsonl
from .seeding import derive_rng

SPLIT_NAMES = ("train", "valid", "test")
DUP_MODES = ("grouped", "paper")


@dataclass(frozen=True)
class SplitConfig:
    heldout_size: int = 3000
    seed: int = 0
    dup_mode: str = "grouped"

    def __post_init__(self) -> None:
        if self.heldout_size < 1:
            raise ValidationError(f"heldout size must be positive, got {self.heldout_size}")
        if self.dup_mode not in DUP_MODES:
            raise ValidationError(
                f"dup_mode must be one of {DUP_MODES}, got {self.dup_mode!r}"
            )


@dataclass
class DuplicateReport:
    """ids grouped by identical target sentence; groups have size >= 2."""

    groups: list[list[int]]
    unique_ids: list[int]


@dataclass
class SplitResult:
    train: list[MatchedSentence]
    valid: list[MatchedSentence]
    test: list[MatchedSentence]
    # per n-gram bucket: how many of its sentences went to each split
    bucket_report: dict[int, tuple[int, int, int]]
    seed_used: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.valid), len(self.test))


def bucketize(mc: MatchedCorpus) -> dict[int, list[int]]:
    """Group sentence ids by the longest term n-gram of each sentence."""
    if not mc.sentences:
        raise ValidationError("cannot bucketize an empty corpus")
    buckets: dict[int, list[int]] = {}
    for ms in mc.sentences:
        buckets.setdefault(ms.max_ngram, []).append(ms.pair.id)
    return buckets


def duplicate_check(ids: Sequence[int], mc: MatchedCorpus) -> DuplicateReport:
    """Partition ids into identical-target groups and the remaining uniques.

    Grouping is by the exact target token sequence; source-side variation
    does not separate members.  Output order follows first occurrence.
    """
    by_id = {ms.pair.id: ms for ms in mc.sentences}
    members: dict[Tokens, list[int]] = {}
    key_order: list[Tokens] = []
    for i in ids:
        key = by_id[i].pair.target
        if key not in members:
            members[key] = []
            key_order.append(key)
        members[key].append(i)
    groups = [members[k] for k in key_order if len(members[k]) >= 2]
    unique_ids = [members[k][0] for k in key_order if len(members[k]) == 1]
    return DuplicateReport(groups=groups, unique_ids=unique_ids)


def _integer_quotas(raw: list[Fraction], n: int) -> list[int]:
    """Largest-remainder integerization of raw shares; totals exactly n.

    Raw shares may be negative when a split was previously over-assigned;
    those floor to zero and rank last for remainder seats.
    """
    base = [max(0, math.floor(r)) for r in raw]
    while sum(base) > n:
        j = max(range(len(base)), key=lambda i: base[i])
        base[j] -= 1
    remainder = n - sum(base)
    ranked = sorted(range(len(raw)), key=lambda i: (-(raw[i] - base[i]), i))
    pos = 0
    while remainder > 0:
        base[ranked[pos % len(ranked)]] += 1
        remainder -= 1
        pos += 1
    return base


def _deal_round_robin(
    ids: Sequence[int], remaining: list[int], assign: dict[int, int]
) -> None:
    """Deal ids cyclically over splits that still have room.

    If every split is full (possible after duplicate groups overflowed a
    quota), leftovers land in train, which is by far the largest split.
    """
    j = 0
    for i in ids:
        placed = False
        for _ in range(len(remaining)):
            if remaining[j] > 0:
                assign[i] = j
                remaining[j] -= 1
                j = (j + 1) % len(remaining)
                placed = True
                break
            j = (j + 1) % len(remaining)
        if not placed:
            assign[i] = 0


def split(mc: MatchedCorpus, cfg: SplitConfig) -> SplitResult:
    """Partition a matched corpus into train/valid/test.

    Buckets (by max term n-gram) are processed longest-first.  For each
    bucket, per-split quotas are the proportional shares of the bucket
    size, integerized by largest remainder against the running totals so
    the global sizes come out exact.  Duplicates are placed before unique
    sentences; uniques are shuffled (seeded) and dealt round-robin into
    whatever quota is left.
    """
    total = len(mc.sentences)
    if total == 0:
        raise ValidationError("cannot split an empty corpus")
    if 2 * cfg.heldout_size >= total:
        raise ValidationError(
            f"need 2 * heldout_size < corpus size; got heldout_size={cfg.heldout_size} "
            f"for {total} sentences"
        )
    by_id = {ms.pair.id: ms for ms in mc.sentences}
    if len(by_id) != total:
        raise ValidationError("sentence ids are not unique")

    shares = (total - 2 * cfg.heldout_size, cfg.heldout_size, cfg.heldout_size)
    buckets = bucketize(mc)

    assign: dict[int, int] = {}
    target_cum = [Fraction(0)] * 3
    assigned_cum = [0, 0, 0]

    # grouped mode ties every member of an identical-target group to one
    # split; the choice is made when the group is first encountered.
    group_of: dict[int, int] = {}
    group_split: dict[int, int] = {}
    if cfg.dup_mode == "grouped":
        corpus_dups = duplicate_check([ms.pair.id for ms in mc.sentences], mc)
        for g, ids in enumerate(corpus_dups.groups):
            for i in ids:
                group_of[i] = g

    bucket_report: dict[int, tuple[int, int, int]] = {}
    for k in sorted(buckets, reverse=True):
        ids = buckets[k]
        n_b = len(ids)
        for j in range(3):
            target_cum[j] += Fraction(n_b * shares[j], total)
        quotas = _integer_quotas(
            [target_cum[j] - assigned_cum[j] for j in range(3)], n_b
        )
        remaining = list(quotas)

        if cfg.dup_mode == "grouped":
            forced = [i for i in ids if group_of.get(i, -1) in group_split]
            fresh_groups: list[int] = []
            fresh_members: dict[int, list[int]] = {}
            uniques = []
            for i in ids:
                g = group_of.get(i)
                if g is None:
                    uniques.append(i)
                elif g not in group_split:
                    if g not in fresh_members:
                        fresh_members[g] = []
                        fresh_groups.append(g)
                    fresh_members[g].append(i)
            for i in forced:
                j = group_split[group_of[i]]
                assign[i] = j
                remaining[j] -= 1
            for g in fresh_groups:
                j = max(range(3), key=lambda s: (remaining[s], -s))
                group_split[g] = j
                for i in fresh_members[g]:
                    assign[i] = j
                    remaining[j] -= 1
            rng = derive_rng(cfg.seed, f"split:{k}")
            rng.shuffle(uniques)
            _deal_round_robin(uniques, [max(0, r) for r in remaining], assign)
        else:
            report = duplicate_check(ids, mc)
            dup_ids = [i for grp in report.groups for i in grp]
            n_dup = len(dup_ids)
            dup_alloc = _integer_quotas(
                [Fraction(n_dup * quotas[j], n_b) for j in range(3)], n_dup
            )
            # never let the duplicate allocation eat more than a split's quota
            for j in range(3):
                excess = dup_alloc[j] - quotas[j]
                if excess > 0:
                    dup_alloc[j] = quotas[j]
                    for other in range(3):
                        if excess == 0:
                            break
                        spare = quotas[other] - dup_alloc[other]
                        take = min(spare, excess)
                        dup_alloc[other] += take
                        excess -= take
            at = 0
            for j in range(3):
                for i in dup_ids[at : at + dup_alloc[j]]:
                    assign[i] = j
                    remaining[j] -= 1
                at += dup_alloc[j]
            uniques = list(report.unique_ids)
            rng = derive_rng(cfg.seed, f"split:{k}")
            rng.shuffle(uniques)
            _deal_round_robin(uniques, remaining, assign)

        counts = [0, 0, 0]
        for i in ids:
            j = assign[i]
            counts[j] += 1
            assigned_cum[j] += 1
        bucket_report[k] = tuple(counts)

    out: list[list[MatchedSentence]] = [[], [], []]
    for i in sorted(assign):
        out[assign[i]].append(by_id[i])
    return SplitResult(
        train=out[0],
        valid=out[1],
        test=out[2],
        bucket_report=bucket_report,
        seed_used=cfg.seed,
    )


def unique_subset(
    test: Sequence[MatchedSentence],
    train: Sequence[MatchedSentence],
    valid: Sequence[MatchedSentence],
) -> list[MatchedSentence]:
    """Test sentences whose target is unseen in train/valid and unrepeated in test."""
    seen = {ms.pair.target for ms in train} | {ms.pair.target for ms in valid}
    out = []
    for ms in test:
        if ms.pair.target in seen:
            continue
        seen.add(ms.pair.target)
        out.append(ms)
    return out


def write_split(
    result: SplitResult, cfg: SplitConfig, mc: MatchedCorpus, out_dir: str | Path
) -> None:
    """Emit the split as text files, per-split JSONL, and a JSON report.

    Writes ``{train,valid,test}.{src,tgt}``, ``{train,valid,test}.jsonl``
    and ``split_report.json`` into ``out_dir``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    parts = {"train": result.train, "valid": result.valid, "test": result.test}
    for name, sentences in parts.items():
        with open(out_dir / f"{name}.src", "w", encoding="utf-8") as src_f, open(
            out_dir / f"{name}.tgt", "w", encoding="utf-8"
        ) as tgt_f:
            for ms in sentences:
                src_f.write(" ".join(ms.pair.source) + "\n")
                tgt_f.write(" ".join(ms.pair.target) + "\n")
        write_matched_jsonl(
            MatchedCorpus(sentences=tuple(sentences), dictionary=mc.dictionary),
            out_dir / f"{name}.jsonl",
        )
    dups = duplicate_check([ms.pair.id for ms in mc.sentences], mc)
    report = {
        "sizes": dict(zip(SPLIT_NAMES, result.sizes)),
        "heldout_size": cfg.heldout_size,
        "seed": result.seed_used,
        "dup_mode": cfg.dup_mode,
        "duplicate_groups": len(dups.groups),
        "duplicate_sentences": sum(len(g) for g in dups.groups),
        "bucket_report": {
            str(k): list(result.bucket_report[k]) for k in sorted(result.bucket_report)
        },
    }
    with open(out_dir / "split_report.json", "w", encoding="utf-8") as f:
        json.dump(report, f, ensure_ascii=False, indent=2)
        f.write("\n")
