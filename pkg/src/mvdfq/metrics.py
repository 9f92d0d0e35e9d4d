"""Evaluation measures: error rate, per-class and macro F1, ROC50."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyInput, LengthMismatch, SingleClass


@dataclass
class EvalReport:
    error_rate: float
    macro_f1: float
    per_class_f1: dict
    labels: tuple
    confusion: np.ndarray          # rows: truth, columns: prediction, ordered by ``labels``
    roc50: float | None = None
    n: int = 0

    def to_tsv(self) -> str:
        lines = ["metric\tvalue", f"n\t{self.n}",
                 f"error_rate\t{self.error_rate!r}", f"macro_f1\t{self.macro_f1!r}"]
        if self.roc50 is not None:
            lines.append(f"roc50\t{self.roc50!r}")
        for lab, f1 in sorted(self.per_class_f1.items()):
            lines.append(f"f1[{lab}]\t{f1!r}")
        for a, ta in enumerate(self.labels):
            for b, pb in enumerate(self.labels):
                if self.confusion[a, b]:
                    lines.append(f"confusion[{ta}->{pb}]\t{int(self.confusion[a, b])}")
        return "\n".join(lines) + "\n"


def evaluate(predictions: Sequence[str], truths: Sequence[str]) -> EvalReport:
    predictions = [str(p) for p in predictions]
    truths = [str(t) for t in truths]
    if len(predictions) != len(truths):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(truths)} truths")
    if not truths:
        raise EmptyInput("nothing to evaluate")
    labels = tuple(sorted(set(truths) | set(predictions)))
    index = {lab: i for i, lab in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(truths, predictions):
        confusion[index[t], index[p]] += 1
    per_class = {}
    for lab in sorted(set(truths)):
        i = index[lab]
        tp = int(confusion[i, i])
        fp = int(confusion[:, i].sum()) - tp
        fn = int(confusion[i, :].sum()) - tp
        per_class[lab] = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
    errors = len(truths) - int(np.trace(confusion))
    return EvalReport(errors / len(truths), sum(per_class.values()) / len(per_class),
                      per_class, labels, confusion, None, len(truths))


def roc50(scores: Sequence[float], labels: Sequence[int], max_fp: int = 50) -> float:
    """Area under the ROC curve up to the ``max_fp``-th false positive, in [0, 1].

    Ties are broken pessimistically: among equal scores, negatives rank first.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if len(scores) != len(labels):
        raise LengthMismatch(f"{len(scores)} scores for {len(labels)} labels")
    pos = labels > 0
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("roc50 needs at least one positive and one negative")
    order = np.lexsort((pos, -scores))   # primary: descending score; then negatives first
    limit = min(max_fp, n_neg)
    tp = fp = area = 0
    for is_pos in pos[order]:
        if is_pos:
            tp += 1
        else:
            fp += 1
            area += tp
            if fp == limit:
                break
    return area / (limit * n_pos)
