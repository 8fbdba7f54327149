"""Ranking metrics: ROC-AUC with tie handling, plus batch evaluation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UndefinedMetricError


def tied_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the average of their rank range."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    start = 0
    while start < values.size:
        end = start
        while end < values.size and values[order[end]] == values[order[start]]:
            end += 1
        # ranks start+1 .. end averaged over the tie group
        ranks[order[start:end]] = 0.5 * (start + 1 + end)
        start = end
    return ranks


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve via the rank statistic.

    AUC = (R_pos - P*(P+1)/2) / (P*N) with average ranks for ties, which
    equals P(score_pos > score_neg) + 0.5 * P(tie).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DimensionError(
            f"scores and labels must be equal-length 1-D, got {scores.shape} and {labels.shape}"
        )
    pos = labels == 1.0
    n_pos = int(pos.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs at least one positive and one negative label")
    ranks = tied_ranks(scores)
    r_pos = float(ranks[pos].sum())
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


@dataclass
class Metrics:
    """Evaluation result over a labeled dataset."""

    auc: float
    mse: float
    n_pos: int
    n_neg: int

    def as_dict(self) -> dict:
        return {"auc": self.auc, "mse": self.mse, "n_pos": self.n_pos, "n_neg": self.n_neg}


def evaluate(score_fn, examples) -> Metrics:
    """Apply `score_fn` to every example and summarize.

    Examples must expose a binary `.label`; evaluation order never affects
    the result.
    """
    if not examples:
        raise UndefinedMetricError("cannot evaluate an empty dataset")
    scores = np.array([float(score_fn(ex)) for ex in examples])
    labels = np.array([float(ex.label) for ex in examples])
    auc = roc_auc(scores, labels)
    diff = scores - labels
    return Metrics(
        auc=auc,
        mse=float(np.mean(diff * diff)),
        n_pos=int((labels == 1.0).sum()),
        n_neg=int((labels == 0.0).sum()),
    )
