"""Training-prior estimates, Bayes-rule adaptation and accuracy."""

import warnings

import numpy as np

from .core import (DomainError, PriorShiftWarning, argmax_decisions,
                   as_label_vector, as_prediction_matrix, as_prior_vector,
                   normalize)

EPSILON_FLOOR = 1e-12


def estimate_train_priors_counts(y, n_classes):
    """Class frequencies of the training labels."""
    y = as_label_vector(y, n_classes)
    if y.size == 0:
        raise DomainError("estimate_train_priors_counts: needs at least one label")
    return normalize(np.bincount(y, minlength=n_classes))


def estimate_train_priors_predictions(train_preds):
    """Average training prediction; usually the better training-prior estimate."""
    preds = as_prediction_matrix(train_preds)
    return as_prior_vector(preds.mean(axis=0))


def _reweight(preds, weights):
    out = preds * weights[None, :]
    mass = out.sum(axis=1, keepdims=True)
    dead = mass[:, 0] <= 0
    if np.any(dead):
        warnings.warn(f"{int(dead.sum())} rows lost all mass after reweighting; kept unchanged",
                      PriorShiftWarning, stacklevel=3)
        out[dead] = preds[dead]
        mass[dead] = 1.0
    return out / mass


def adapt_predictions(preds, train_priors, new_priors, epsilon_floor=EPSILON_FLOOR):
    """Adapt posteriors to new class priors.

    Each row is multiplied by ``new_priors / train_priors`` and
    renormalized. Training priors are floored at ``epsilon_floor``.
    """
    preds = as_prediction_matrix(preds)
    tp = as_prior_vector(train_priors)
    npri = as_prior_vector(new_priors)
    if tp.size != preds.shape[1] or npri.size != preds.shape[1]:
        raise DomainError("adapt_predictions: prior lengths must match the number of classes")
    return _reweight(preds, npri / np.maximum(tp, epsilon_floor))


def adapt_predictions_ratio(preds, weights):
    """Adapt posteriors with a prior ratio ``w = p_E(Y) / p_T(Y)``.

    Negative weights, which ratio estimators can produce on inconsistent
    data, are clamped to zero with a warning.
    """
    preds = as_prediction_matrix(preds)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (preds.shape[1],) or not np.all(np.isfinite(w)):
        raise DomainError("adapt_predictions_ratio: need one finite weight per class")
    if np.any(w < 0):
        warnings.warn(f"negative prior-ratio weights {w[w < 0].tolist()} clamped to 0",
                      PriorShiftWarning, stacklevel=2)
        w = np.maximum(w, 0.0)
    if not np.any(w > 0):
        raise DomainError("adapt_predictions_ratio: at least one weight must be positive")
    return _reweight(preds, w)


def clip_to_simplex(estimate):
    """Clamp negative entries of an unconstrained prior estimate and renormalize."""
    p = np.asarray(estimate, dtype=np.float64)
    if np.any(p < 0):
        warnings.warn(f"prior estimate {p.tolist()} lies outside the simplex; "
                      "negative entries clamped to 0", PriorShiftWarning, stacklevel=2)
    return normalize(np.maximum(p, 0.0))


def evaluate_accuracy(preds, y):
    """Fraction of rows whose argmax decision matches the label."""
    preds = as_prediction_matrix(preds)
    y = as_label_vector(y, preds.shape[1])
    if y.size != preds.shape[0]:
        raise DomainError(f"{preds.shape[0]} prediction rows but {y.size} labels")
    return float(np.mean(argmax_decisions(preds) == y))
