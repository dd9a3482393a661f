"""Gaussian naive Bayes scoring.

Training fits class-conditional Gaussians per feature by maximum likelihood;
scoring returns normalized positive-class posteriors computed in log-space.
A model trained on zero feature columns degrades to the prior-only model
whose scores all equal the positive prior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import ArityMismatch, SingleClassTrainingSet

VAR_SMOOTHING = 1e-9
VAR_FLOOR = 1e-12

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Per-class Gaussian parameters; immutable once trained."""

    priors: np.ndarray      # (2,) class probabilities, index = label
    means: np.ndarray       # (2, n_features)
    variances: np.ndarray   # (2, n_features), smoothed, strictly positive

    @property
    def n_features(self) -> int:
        return self.means.shape[1]

    def score(self, test: Dataset) -> np.ndarray:
        return score(self, test)


def train_gnb(train: Dataset) -> TrainedModel:
    """Fit class-conditional Gaussians with variance smoothing."""
    labels = train.labels
    if labels.min() == labels.max():
        raise SingleClassTrainingSet("training data must contain both classes")
    x = train.features
    counts = np.array([(labels == 0).sum(), (labels == 1).sum()], dtype=np.float64)
    priors = counts / labels.shape[0]

    if train.n_features == 0:
        empty = np.empty((2, 0))
        return TrainedModel(priors, empty, empty.copy())

    means = np.stack([x[labels == c].mean(axis=0) for c in (0, 1)])
    variances = np.stack([x[labels == c].var(axis=0) for c in (0, 1)])
    # Smoothing relative to the spread of the whole training matrix, with an
    # absolute floor so constant datasets stay finite.
    eps = max(VAR_SMOOTHING * float(x.var(axis=0).max()), VAR_FLOOR)
    return TrainedModel(priors, means, variances + eps)


def score(m: TrainedModel, test: Dataset) -> np.ndarray:
    """Positive-class posterior probability for every row of `test`."""
    if test.n_features != m.n_features:
        raise ArityMismatch(m.n_features, test.n_features)
    log_joint = np.empty((test.n_rows, 2))
    for c in (0, 1):
        if m.n_features == 0:
            log_lik = np.zeros(test.n_rows)
        else:
            var = m.variances[c]
            terms = -0.5 * (
                _LOG_2PI
                + np.log(var)
                + (test.features - m.means[c]) ** 2 / var
            )
            # Summing the per-feature terms in value order makes the scores
            # independent of column order, so coalition projections that
            # differ only in feature position score bit-identically.
            log_lik = np.sort(terms, axis=1).sum(axis=1)
        log_joint[:, c] = np.log(m.priors[c]) + log_lik
    # P(y=1 | x) = 1 / (1 + exp(l0 - l1)), evaluated stably.
    return np.exp(log_joint[:, 1] - np.logaddexp(log_joint[:, 0], log_joint[:, 1]))
