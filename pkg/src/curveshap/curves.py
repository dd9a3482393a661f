"""ROC and precision-recall curves, their areas, and point estimation.

Curves are built by a descending threshold sweep with tied scores collapsed
into a single step.  `estimate_tpr` / `estimate_precision` answer "what is
the curve's value at this abscissa" under the three bracketing strategies.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NoPositiveLabels, SingleClassLabels

DEFAULT_GRID_SIZE = 101


class Strategy(enum.Enum):
    OPTIMISTIC = "optimistic"
    PESSIMISTIC = "pessimistic"
    INTERPOLATION = "interpolation"


@dataclass(frozen=True, eq=False)
class RocCurve:
    """ROC points (fpr ascending from (0,0) to (1,1)) and trapezoidal AUC."""

    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.fpr, self.tpr])


@dataclass(frozen=True, eq=False)
class PrCurve:
    """PR points (recall ascending; precision need not be monotone) and AUPRC."""

    recall: np.ndarray
    precision: np.ndarray
    auprc: float

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.recall, self.precision])


def trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    """Trapezoidal integral of y over x (x ascending)."""
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return float(0.5 * np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1])))


def default_grid(size: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    """Evenly spaced abscissa grid over [0, 1]."""
    if size < 2:
        raise DataError(f"grid needs at least 2 points, got {size}")
    return np.linspace(0.0, 1.0, size)


def _sweep(scores: np.ndarray, labels: np.ndarray):
    """Cumulative tp/fp counts at the end of each distinct-score group."""
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    last_of_group = np.flatnonzero(
        np.append(sorted_scores[1:] != sorted_scores[:-1], True)
    )
    tp = np.cumsum(sorted_labels == 1)[last_of_group]
    fp = np.cumsum(sorted_labels == 0)[last_of_group]
    return tp, fp


def roc_from_scores(scores: np.ndarray, labels: np.ndarray) -> RocCurve:
    """Threshold-sweep ROC curve with endpoints (0,0) and (1,1)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassLabels("ROC curve needs both label classes")
    tp, fp = _sweep(scores, labels)
    fpr = np.concatenate([[0.0], fp / n_neg])
    tpr = np.concatenate([[0.0], tp / n_pos])
    return RocCurve(fpr, tpr, trapezoid(tpr, fpr))


def pr_from_scores(scores: np.ndarray, labels: np.ndarray) -> PrCurve:
    """Threshold-sweep PR curve.

    The left endpoint (0, precision of the highest-score step) is prepended
    as a convention; precision at recall 0 is otherwise undefined.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    if n_pos == 0:
        raise NoPositiveLabels("PR curve needs at least one positive label")
    tp, fp = _sweep(scores, labels)
    recall = tp / n_pos
    precision = tp / (tp + fp)
    recall = np.concatenate([[0.0], recall])
    precision = np.concatenate([[precision[0]], precision])
    return PrCurve(recall, precision, trapezoid(precision, recall))


def auc(c: RocCurve) -> float:
    return c.auc


def auprc(c: PrCurve) -> float:
    return c.auprc


def _estimate(x: np.ndarray, y: np.ndarray, query: float, s: Strategy) -> float:
    if not isinstance(s, Strategy):
        raise DataError(f"unknown strategy {s!r}")
    # Clamp to the curve's span (relevant for PR curves; ROC spans [0,1]).
    if query <= x[0]:
        query = float(x[0])
    elif query >= x[-1]:
        query = float(x[-1])
    b = int(np.searchsorted(x, query, side="left"))
    a = int(np.searchsorted(x, query, side="right")) - 1
    y_a, y_b = float(y[a]), float(y[b])
    if s is Strategy.OPTIMISTIC:
        return max(y_a, y_b)
    if s is Strategy.PESSIMISTIC:
        return min(y_a, y_b)
    if x[a] == x[b]:
        # Query sits on a knot: a == b for a unique knot (both terms equal);
        # for a repeated abscissa, average the two extremes of the run.
        return 0.5 * (y_a + y_b)
    x_a, x_b = float(x[a]), float(x[b])
    return y_a + (y_b - y_a) * (query - x_a) / (x_b - x_a)


def estimate_tpr(c: RocCurve, fpr_query: float, s: Strategy) -> float:
    """Curve value at `fpr_query` under the given bracketing strategy."""
    return _estimate(c.fpr, c.tpr, fpr_query, s)


def estimate_precision(c: PrCurve, recall_query: float, s: Strategy) -> float:
    """Curve value at `recall_query`; queries outside the span clamp to it."""
    return _estimate(c.recall, c.precision, recall_query, s)
