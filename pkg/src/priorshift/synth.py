"""Two-Gaussian testbed with logistic classifiers and exact confusion matrices.

Class ``k`` in ``{0, 1}`` draws ``x ~ N(mean_k, sigma)`` (``sigma`` is a
standard deviation). With the defaults ``N(-2, 2)`` / ``N(2, 2)`` and equal
priors, the exact log posterior ratio is ``x``, so the logistic
classifier with slope 1 and intercept 0 is perfectly calibrated.

Randomness: ``numpy.random.default_rng`` seeded from
``SeedSequence(seed).spawn(K + 1)``; stream 0 draws labels (or shuffles),
stream ``k + 1`` draws the samples of class ``k``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats
from scipy.special import expit

from .core import (ConfusionMatrix, DomainError, NumericalError,
                   as_label_vector, as_prior_vector)


@dataclass(frozen=True)
class GaussianPair:
    mean_0: float = -2.0
    mean_1: float = 2.0
    sigma: float = 2.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise DomainError("GaussianPair: sigma must be > 0")

    @property
    def means(self):
        return (self.mean_0, self.mean_1)


@dataclass(frozen=True)
class LogisticClassifier:
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise DomainError("LogisticClassifier: parameters must be finite")


CALIBRATED = LogisticClassifier(1.0, 0.0)
OVERCONFIDENT = LogisticClassifier(2.0, 0.0)


def _streams(seed, k):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(k + 1)]


def generate_dataset(pair, priors, n, seed):
    """Draw ``n`` labeled samples; returns ``(samples, labels)``."""
    priors = as_prior_vector(priors)
    if priors.size != 2:
        raise DomainError("generate_dataset: the testbed has exactly two classes")
    if n < 1:
        raise DomainError("generate_dataset: n must be >= 1")
    rngs = _streams(seed, 2)
    labels = rngs[0].choice(2, size=n, p=priors)
    samples = np.empty(n)
    for k, mean in enumerate(pair.means):
        idx = np.flatnonzero(labels == k)
        samples[idx] = rngs[k + 1].normal(mean, pair.sigma, size=idx.size)
    return samples, labels


def classifier_predictions(clf, samples):
    """Posteriors and logits of a logistic classifier.

    Returns ``(preds, logits)`` with ``logits = [0, a x + b]`` and
    ``preds[:, 1] = sigmoid(a x + b)``.
    """
    x = np.asarray(samples, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DomainError("classifier_predictions: samples must be finite")
    s = clf.a * x + clf.b
    preds = np.column_stack([expit(-s), expit(s)])
    logits = np.column_stack([np.zeros_like(s), s])
    return preds, logits


def decision_threshold(clf):
    if clf.a == 0:
        raise DomainError("decision_threshold: slope a = 0 has no decision threshold")
    return -clf.b / clf.a


def true_confusion_matrix(pair, clf):
    """Exact hard confusion matrix from the Gaussian CDF at the threshold.

    For ``a > 0`` the classifier decides class 1 right of the threshold;
    for ``a < 0`` left of it.
    """
    t = decision_threshold(clf)
    cm = np.empty((2, 2))
    for j, mean in enumerate(pair.means):
        right = stats.norm.sf(t, loc=mean, scale=pair.sigma)
        p1 = right if clf.a > 0 else 1.0 - right
        cm[:, j] = (1.0 - p1, p1)
    return ConfusionMatrix(cm, "conditional", "hard")


def true_soft_confusion_matrix(pair, clf, tol=1e-8):
    """Exact soft confusion matrix ``E[f(x) | Y=j]`` by adaptive quadrature."""
    cm = np.empty((2, 2))
    for j, mean in enumerate(pair.means):
        def integrand(x):
            return expit(clf.a * x + clf.b) * stats.norm.pdf(x, mean, pair.sigma)
        # the Gaussian mass beyond 40 sigma is far below tol
        lo, hi = mean - 40 * pair.sigma, mean + 40 * pair.sigma
        points = None
        if clf.a != 0 and lo < -clf.b / clf.a < hi:
            points = [-clf.b / clf.a]
        val, err = integrate.quad(integrand, lo, hi, epsabs=tol, epsrel=0, points=points, limit=200)
        if not err <= tol * 10:
            raise NumericalError(f"true_soft_confusion_matrix: quadrature error {err:.3g}")
        cm[:, j] = (1.0 - val, val)
    return ConfusionMatrix(cm, "conditional", "soft")


def _largest_remainder(priors, n_out):
    raw = priors * n_out
    counts = np.floor(raw).astype(int)
    short = n_out - counts.sum()
    # ties resolved by class index for determinism
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def resample_to_priors(samples, labels, target_priors, n_out, seed):
    """Subsample without replacement so class proportions follow ``target_priors``.

    Per-class counts use largest-remainder rounding of
    ``target_priors * n_out``; the output order is shuffled.
    """
    samples = np.asarray(samples)
    labels = as_label_vector(labels)
    target = as_prior_vector(target_priors)
    k = target.size
    if labels.size != samples.shape[0]:
        raise DomainError("resample_to_priors: samples and labels differ in length")
    if labels.size and labels.max() >= k:
        raise DomainError("resample_to_priors: labels exceed the number of target classes")
    counts = _largest_remainder(target, int(n_out))
    rngs = _streams(seed, k)
    chosen = []
    for c in range(k):
        pool = np.flatnonzero(labels == c)
        if counts[c] > pool.size:
            raise DomainError(
                f"resample_to_priors: class {c} needs {counts[c]} samples, only {pool.size} available")
        chosen.append(rngs[c + 1].choice(pool, size=counts[c], replace=False))
    idx = rngs[0].permutation(np.concatenate(chosen))
    return samples[idx], labels[idx]
