"""Binary classification scores derived from a confusion matrix.

The positive class is 'abnormal' throughout. Scores are computed in exact
rational arithmetic and returned as floats; undefined denominators raise
instead of silently returning 0.
"""

from dataclasses import dataclass
from fractions import Fraction

from .dataset import ABNORMAL, NORMAL, _atomic_write


class UndefinedMetricError(ValueError):
    """A score's denominator is zero for this confusion matrix."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts of (predicted, actual) outcomes with abnormal as positive."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "tn", "fp", "fn"):
            value = getattr(self, name)
            if not (isinstance(value, int) and value >= 0):
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")

    @property
    def total(self):
        return self.tp + self.tn + self.fp + self.fn


def confusion(predictions, actuals):
    """Tally predictions against ground truth (positive class: abnormal)."""
    predictions = list(predictions)
    actuals = list(actuals)
    if len(predictions) != len(actuals):
        raise ValueError(
            f"length mismatch: {len(predictions)} predictions vs {len(actuals)} actuals"
        )
    if not predictions:
        raise ValueError("cannot build a confusion matrix from empty inputs")
    tp = tn = fp = fn = 0
    for pred, act in zip(predictions, actuals):
        if pred not in (NORMAL, ABNORMAL) or act not in (NORMAL, ABNORMAL):
            raise ValueError(f"labels must be 'normal' or 'abnormal', got {(pred, act)!r}")
        if pred == ABNORMAL and act == ABNORMAL:
            tp += 1
        elif pred == NORMAL and act == NORMAL:
            tn += 1
        elif pred == ABNORMAL and act == NORMAL:
            fp += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def _precision_fraction(cm):
    if cm.tp + cm.fp == 0:
        raise UndefinedMetricError("precision undefined: no positive predictions (tp+fp=0)")
    return Fraction(cm.tp, cm.tp + cm.fp)


def _recall_fraction(cm):
    if cm.tp + cm.fn == 0:
        raise UndefinedMetricError("recall undefined: no positive actuals (tp+fn=0)")
    return Fraction(cm.tp, cm.tp + cm.fn)


def accuracy(cm):
    """(tp + tn) / total."""
    if cm.total == 0:
        raise UndefinedMetricError("accuracy undefined: empty confusion matrix")
    return float(Fraction(cm.tp + cm.tn, cm.total))


def precision(cm):
    """tp / (tp + fp)."""
    return float(_precision_fraction(cm))


def recall(cm):
    """tp / (tp + fn)."""
    return float(_recall_fraction(cm))


def f1(cm):
    """Harmonic mean 2*P*R / (P + R) of precision and recall."""
    p = _precision_fraction(cm)
    r = _recall_fraction(cm)
    if p + r == 0:
        raise UndefinedMetricError("f1 undefined: precision + recall = 0")
    return float(2 * p * r / (p + r))


def write_metrics_csv(path, rows):
    """Comparison report: one row per kernel, columns
    kernel,accuracy,precision,recall,f1,support_vectors."""
    lines = ["kernel,accuracy,precision,recall,f1,support_vectors"]
    for kernel, acc, prec, rec, f1_score, nsv in rows:
        lines.append(
            f"{kernel},{acc:.17g},{prec:.17g},{rec:.17g},{f1_score:.17g},{nsv}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def write_confusion_csv(path, cm):
    _atomic_write(path, "tp,tn,fp,fn\n" f"{cm.tp},{cm.tn},{cm.fp},{cm.fn}\n")
