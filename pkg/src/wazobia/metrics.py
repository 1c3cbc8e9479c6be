"""Entity-level precision/recall/F1, token accuracy, and run-history export.

Entity matching is exact: a predicted span counts as a true positive only
when a gold span with the same (type, start_tok, end_tok) exists in the same
sentence. Zero denominators yield 0.0, never NaN.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .errors import WazobiaError
from .text import EntitySpan, EntityType


def f1(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0.0 when both are 0."""
    for name, value in (("precision", precision), ("recall", recall)):
        if not 0.0 <= value <= 1.0:
            raise WazobiaError("DOMAIN", f"{name} {value} outside [0, 1]")
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class PRF:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRF":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        return cls(tp, fp, fn, precision, recall, f1(precision, recall))


def entity_prf(
    gold: Sequence[Sequence[EntitySpan]], pred: Sequence[Sequence[EntitySpan]]
) -> Tuple[PRF, Dict[EntityType, PRF]]:
    """Micro PRF over exact span matches, plus a per-type breakdown."""
    if len(gold) != len(pred):
        raise WazobiaError(
            "LENGTH_MISMATCH", f"{len(gold)} gold sentences vs {len(pred)} predicted"
        )
    counts = {t: [0, 0, 0] for t in EntityType}  # tp, fp, fn per type
    for gold_spans, pred_spans in zip(gold, pred):
        gold_keys = {s.key() for s in gold_spans}
        pred_keys = {s.key() for s in pred_spans}
        for key in pred_keys & gold_keys:
            counts[key[0]][0] += 1
        for key in pred_keys - gold_keys:
            counts[key[0]][1] += 1
        for key in gold_keys - pred_keys:
            counts[key[0]][2] += 1
    per_type = {t: PRF.from_counts(*counts[t]) for t in EntityType}
    micro = PRF.from_counts(
        sum(c[0] for c in counts.values()),
        sum(c[1] for c in counts.values()),
        sum(c[2] for c in counts.values()),
    )
    return micro, per_type


def token_accuracy(
    gold: Sequence[Sequence[str]],
    pred: Sequence[Sequence[str]],
    exclude_o: bool = False,
) -> float:
    """Fraction of positions with matching labels.

    With ``exclude_o`` only positions whose gold label is not O count toward
    the denominator.
    """
    if len(gold) != len(pred):
        raise WazobiaError(
            "LENGTH_MISMATCH", f"{len(gold)} gold sentences vs {len(pred)} predicted"
        )
    correct = total = 0
    for gold_labels, pred_labels in zip(gold, pred):
        if len(gold_labels) != len(pred_labels):
            raise WazobiaError(
                "LENGTH_MISMATCH",
                f"sentence with {len(gold_labels)} gold vs {len(pred_labels)} predicted labels",
            )
        for g, p in zip(gold_labels, pred_labels):
            if exclude_o and g == "O":
                continue
            total += 1
            correct += g == p
    return correct / total if total else 0.0


@dataclass(frozen=True)
class RunEpoch:
    """One row of per-epoch training history."""

    epoch: int
    training_loss: float
    validation_loss: float
    precision: float
    recall: float
    f1: float
    accuracy: float


HISTORY_CSV_HEADER = "epoch,training_loss,validation_loss,precision,recall,f1_score,accuracy"


def history_csv(history: Sequence[RunEpoch]) -> str:
    """Render history as CSV with the fixed seven-column header."""
    buf = io.StringIO()
    buf.write(HISTORY_CSV_HEADER + "\n")
    for row in history:
        buf.write(
            f"{row.epoch},{row.training_loss:.6f},{row.validation_loss:.6f},"
            f"{row.precision:.6f},{row.recall:.6f},{row.f1:.6f},{row.accuracy:.6f}\n"
        )
    return buf.getvalue()


def export_history(history: Sequence[RunEpoch], path) -> None:
    if not history:
        raise WazobiaError("EMPTY_HISTORY", "no epochs to export")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(history_csv(history))


def parse_history_csv(text: str) -> List[RunEpoch]:
    """Inverse of history_csv, used for round-trip checks and plotting."""
    lines = [line for line in text.splitlines() if line]
    if not lines or lines[0] != HISTORY_CSV_HEADER:
        raise WazobiaError("BAD_FORMAT", "unexpected history CSV header")
    rows = []
    for line in lines[1:]:
        fields = line.split(",")
        if len(fields) != 7:
            raise WazobiaError("BAD_FORMAT", f"expected 7 columns, got {len(fields)}")
        rows.append(
            RunEpoch(
                epoch=int(fields[0]),
                training_loss=float(fields[1]),
                validation_loss=float(fields[2]),
                precision=float(fields[3]),
                recall=float(fields[4]),
                f1=float(fields[5]),
                accuracy=float(fields[6]),
            )
        )
    return rows
