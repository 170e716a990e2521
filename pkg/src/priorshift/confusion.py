"""Confusion matrices from labeled predictions and decision statistics."""

import warnings

import numpy as np

from .core import (ConfusionMatrix, DomainError, PriorShiftWarning,
                   argmax_decisions, as_label_vector, as_prediction_matrix,
                   as_prior_vector, normalize)


def _check_pair(preds, y):
    preds = as_prediction_matrix(preds)
    y = as_label_vector(y, preds.shape[1])
    if y.size != preds.shape[0]:
        raise DomainError(f"{preds.shape[0]} prediction rows but {y.size} labels")
    return preds, y


def _column_means(rows, y, k):
    # rows: N x K contributions; column k of the result averages rows with label k
    sums = np.zeros((k, k))
    np.add.at(sums.T, y, rows)
    counts = np.bincount(y, minlength=k)
    empty = counts == 0
    if np.any(empty):
        warnings.warn(
            f"classes {np.flatnonzero(empty).tolist()} absent from validation labels; "
            "their confusion-matrix columns are set to uniform",
            PriorShiftWarning, stacklevel=3)
    cm = np.full((k, k), 1.0 / k)
    cm[:, ~empty] = sums[:, ~empty] / counts[~empty]
    return cm


def estimate_cm_hard(preds, y):
    """Conditional confusion matrix counted from argmax decisions.

    Entry ``(i, k)`` is the fraction of validation samples of class ``k``
    on which the classifier decides ``i``. Columns of classes missing
    from ``y`` are filled with ``1/K`` and a warning is emitted.
    """
    preds, y = _check_pair(preds, y)
    k = preds.shape[1]
    onehot = np.eye(k)[argmax_decisions(preds)]
    return ConfusionMatrix(_column_means(onehot, y, k), "conditional", "hard")


def estimate_cm_soft(preds, y):
    """Soft confusion matrix: column ``k`` is the mean prediction over class ``k``."""
    preds, y = _check_pair(preds, y)
    k = preds.shape[1]
    return ConfusionMatrix(_column_means(preds, y, k), "conditional", "soft")


def conditional_to_joint(cm, train_priors):
    """Turn ``p(D|Y)`` into ``p(D, Y)`` by scaling column ``k`` with ``p_T(Y=k)``."""
    if cm.form != "conditional":
        raise DomainError("conditional_to_joint: expects a conditional confusion matrix")
    p = as_prior_vector(train_priors)
    if p.size != cm.n_classes:
        raise DomainError("conditional_to_joint: prior length does not match K")
    return ConfusionMatrix(cm.values * p[None, :], "joint", cm.flavor)


def decision_counts(preds):
    """Number of argmax decisions for each class."""
    preds = as_prediction_matrix(preds)
    return np.bincount(argmax_decisions(preds), minlength=preds.shape[1])


def soft_decision_mass(preds):
    """Column sums of the predictions: fractional analogue of :func:`decision_counts`."""
    preds = as_prediction_matrix(preds)
    return preds.sum(axis=0)


def decision_rates_hard(preds):
    return normalize(decision_counts(preds))


def decision_rates_soft(preds):
    preds = as_prediction_matrix(preds)
    return as_prior_vector(preds.mean(axis=0))
