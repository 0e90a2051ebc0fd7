"""Joint translation + masked-span loss arithmetic over precomputed log-probabilities.

This module does no model inference.  Each record carries one
log-probability per target position for the clean decoding pass (the final
entry scores end-of-sequence) and, optionally, the log-probabilities the
same positions receive when the decoder input is the corrupted sequence,
together with the 0/1 mask saying which positions were corrupted.  Sums use
exact (compensated) float summation so results do not depend on record
order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .errors import FormatError, ValidationError


@dataclass(frozen=True)
class LogProbRecord:
    id: int
    translation_logprobs: tuple[float, ...]
    ssp_logprobs: tuple[float, ...] | None = None
    mask: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not self.translation_logprobs:
            raise ValidationError(f"record {self.id}: no translation log-probs")
        if any(lp > 0 for lp in self.translation_logprobs):
            raise ValidationError(f"record {self.id}: positive log-probability")
        if self.ssp_logprobs is not None:
            if any(lp > 0 for lp in self.ssp_logprobs):
                raise ValidationError(f"record {self.id}: positive log-probability")
            if self.mask is None:
                raise ValidationError(
                    f"record {self.id}: ssp log-probs without a mask"
                )
            if len(self.ssp_logprobs) != len(self.translation_logprobs):
                raise ValidationError(
                    f"record {self.id}: ssp log-probs have length "
                    f"{len(self.ssp_logprobs)}, expected {len(self.translation_logprobs)}"
                )
        if self.mask is not None:
            if len(self.mask) != len(self.translation_logprobs):
                raise ValidationError(
                    f"record {self.id}: mask has length {len(self.mask)}, "
                    f"expected {len(self.translation_logprobs)}"
                )
            if any(b not in (0, 1) for b in self.mask):
                raise ValidationError(f"record {self.id}: mask bits must be 0 or 1")


@dataclass(frozen=True)
class LossConfig:
    gamma: float = 0.5

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValidationError(f"gamma must be non-negative, got {self.gamma}")


@dataclass(frozen=True)
class LossBreakdown:
    translation_nll: float
    ssp_nll: float
    total: float
    n_sentences: int
    n_masked: int


def translation_nll(record: LogProbRecord) -> float:
    """Negative log-likelihood of the clean sequence: minus the sum of its log-probs."""
    return -math.fsum(record.translation_logprobs)


def ssp_nll(record: LogProbRecord) -> float:
    """NLL restricted to corrupted positions; unmasked positions contribute zero."""
    if record.ssp_logprobs is None or record.mask is None:
        raise ValidationError(
            f"record {record.id}: span-prediction loss needs ssp log-probs and a mask"
        )
    return -math.fsum(
        lp for bit, lp in zip(record.mask, record.ssp_logprobs) if bit
    )


def total_loss(records: Sequence[LogProbRecord], cfg: LossConfig) -> LossBreakdown:
    """Mean translation NLL plus gamma times mean span-prediction NLL.

    Both components are per-sentence sums averaged over sentences.  Records
    without ssp log-probs contribute zero to the span term but still count
    toward the sentence mean.
    """
    records = list(records)
    if not records:
        raise ValidationError("no log-prob records")
    n = len(records)
    t_mean = math.fsum(translation_nll(r) for r in records) / n
    s_mean = (
        math.fsum(ssp_nll(r) if r.ssp_logprobs is not None else 0.0 for r in records)
        / n
    )
    n_masked = sum(sum(r.mask) for r in records if r.ssp_logprobs is not None)
    return LossBreakdown(
        translation_nll=t_mean,
        ssp_nll=s_mean,
        total=t_mean + cfg.gamma * s_mean,
        n_sentences=n,
        n_masked=n_masked,
    )


def per_token_view(records: Sequence[LogProbRecord]) -> dict[str, float | None]:
    """Token-normalized NLLs, the view common in training logs.

    Translation NLL is divided by the total number of scored positions and
    the span NLL by the number of masked positions (None when nothing is
    masked).
    """
    records = list(records)
    if not records:
        raise ValidationError("no log-prob records")
    n_positions = sum(len(r.translation_logprobs) for r in records)
    n_masked = sum(sum(r.mask) for r in records if r.ssp_logprobs is not None)
    t_sum = math.fsum(translation_nll(r) for r in records)
    s_sum = math.fsum(
        ssp_nll(r) for r in records if r.ssp_logprobs is not None
    )
    return {
        "translation_nll_per_token": t_sum / n_positions,
        "ssp_nll_per_masked_token": (s_sum / n_masked) if n_masked else None,
    }


def read_logprob_jsonl(path: str | Path) -> list[LogProbRecord]:
    """Read records of the form {"id", "lp", "ssp_lp"?, "mask"?}.

    A mask one bit shorter than the log-prob rows is padded with a 0 for
    the end-of-sequence slot, which is never a span-prediction target.
    """
    records = []
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
                lp = tuple(float(x) for x in row["lp"])
                ssp_lp = row.get("ssp_lp")
                if ssp_lp is not None:
                    ssp_lp = tuple(float(x) for x in ssp_lp)
                mask = row.get("mask")
                if mask is not None:
                    mask = tuple(int(b) for b in mask)
                    if len(mask) == len(lp) - 1:
                        mask = mask + (0,)
                record = LogProbRecord(
                    id=int(row["id"]),
                    translation_logprobs=lp,
                    ssp_logprobs=ssp_lp,
                    mask=mask,
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}: line {line_no}: {exc}") from exc
            records.append(record)
    return records


def breakdown_to_json(breakdown: LossBreakdown, cfg: LossConfig) -> dict:
    return {
        "translation_nll": breakdown.translation_nll,
        "ssp_nll": breakdown.ssp_nll,
        "gamma": cfg.gamma,
        "total": breakdown.total,
        "n_sentences": breakdown.n_sentences,
        "n_masked": breakdown.n_masked,
    }


