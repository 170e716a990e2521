"""Shared array types, validation and normalization.

Every quantity handled by the package is a plain :class:`numpy.ndarray`.
The ``as_*`` helpers validate an input against the invariants of one
domain type and return a read-only float (or integer) copy. Violations
raise :class:`DomainError` naming the invariant that failed.

Row/column convention for confusion matrices: entry ``(i, k)`` is
``p(D=i | Y=k)`` (conditional form) or ``p(D=i, Y=k)`` (joint form).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

INGEST_TOL = 1e-6
PRIOR_TOL = 1e-9


class PriorShiftError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PriorShiftError, ValueError):
    """Input violates a precondition or a type invariant."""


class NumericalError(PriorShiftError, ArithmeticError):
    """A computation produced a non-finite value or failed to converge.

    ``trace`` holds whatever iteration history was recorded before the
    failure, so callers can inspect it.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)


class SingularMatrixError(NumericalError):
    """A linear solve was requested on a (near-)singular matrix."""


class PriorShiftWarning(UserWarning):
    """Recoverable data issue (clamped weights, empty CM columns, ...)."""


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _vector(v, name):
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise DomainError(f"{name}: expected a 1-D vector, got shape {a.shape}")
    if a.size == 0:
        raise DomainError(f"{name}: vector must be nonempty")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name}: all entries must be finite")
    return a


def normalize(v):
    """Scale a nonnegative vector so it sums to one.

    >>> normalize([1, 3]).tolist()
    [0.25, 0.75]
    """
    a = _vector(v, "normalize")
    if np.any(a < 0):
        raise DomainError("normalize: entries must be nonnegative")
    total = a.sum()
    if not total > 0:
        raise DomainError("normalize: at least one entry must be positive")
    return _frozen(a / total)


def as_prior_vector(v, tol=INGEST_TOL):
    """Validate a point on the probability simplex.

    Entries must be nonnegative and sum to one within ``tol``; the result
    is renormalized exactly so that it sums to one within 1e-9.
    """
    a = _vector(v, "PriorVector")
    if np.any(a < 0):
        raise DomainError("PriorVector: every entry must be >= 0")
    if abs(a.sum() - 1.0) > tol:
        raise DomainError(
            f"PriorVector: entries must sum to 1 (got {a.sum():.12g})")
    return _frozen(a / a.sum())


def as_unconstrained_estimate(v, tol=INGEST_TOL):
    """Validate a unit-mass vector whose entries may be negative."""
    a = _vector(v, "UnconstrainedEstimate")
    if abs(a.sum() - 1.0) > tol:
        raise DomainError(
            f"UnconstrainedEstimate: entries must sum to 1 (got {a.sum():.12g})")
    return _frozen(a)


def as_prediction_matrix(p, tol=INGEST_TOL, allow_empty=False):
    """Validate an N x K row-stochastic matrix of posteriors."""
    a = np.asarray(p, dtype=np.float64)
    if a.ndim != 2:
        raise DomainError(f"PredictionMatrix: expected 2-D array, got shape {a.shape}")
    if a.shape[1] == 0:
        raise DomainError("PredictionMatrix: needs at least one class column")
    if a.shape[0] == 0 and not allow_empty:
        raise DomainError("PredictionMatrix: needs at least one row")
    if not np.all(np.isfinite(a)):
        raise DomainError("PredictionMatrix: all entries must be finite")
    if np.any(a < 0) or np.any(a > 1):
        raise DomainError("PredictionMatrix: every entry must lie in [0, 1]")
    if a.shape[0] and np.max(np.abs(a.sum(axis=1) - 1.0)) > tol:
        raise DomainError("PredictionMatrix: every row must sum to 1")
    return _frozen(a)


def as_logit_matrix(z):
    """Validate an N x K matrix of finite pre-softmax scores."""
    a = np.asarray(z, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] == 0:
        raise DomainError(f"LogitMatrix: expected 2-D array with K >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("LogitMatrix: all entries must be finite")
    return _frozen(a)


def as_label_vector(y, n_classes=None):
    """Validate integer class labels in ``[0, n_classes)``."""
    raw = np.asarray(y)
    if raw.ndim != 1:
        raise DomainError(f"LabelVector: expected 1-D array, got shape {raw.shape}")
    if raw.size and not np.all(np.equal(np.mod(raw, 1), 0)):
        raise DomainError("LabelVector: labels must be integers")
    a = raw.astype(np.int64)
    if a.size and a.min() < 0:
        raise DomainError("LabelVector: labels must be >= 0")
    if n_classes is not None and a.size and a.max() >= n_classes:
        raise DomainError(f"LabelVector: every label must be < K={n_classes}")
    return _frozen(a)


def as_decision_counts(n):
    """Validate a vector of nonnegative decision counts.

    Counts are stored as floats: the soft-decision estimators feed
    fractional decision mass through the same likelihood.
    """
    a = _vector(n, "DecisionCounts")
    if np.any(a < 0):
        raise DomainError("DecisionCounts: counts must be nonnegative")
    return _frozen(a)


def argmax_decision(row):
    """Index of the largest entry; ties go to the lowest index."""
    a = np.asarray(row, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise DomainError("argmax_decision: row must be a nonempty vector")
    return int(np.argmax(a))


def argmax_decisions(preds):
    """Row-wise :func:`argmax_decision` (lowest index wins ties)."""
    a = np.asarray(preds)
    if a.ndim != 2 or a.shape[1] == 0:
        raise DomainError("argmax_decisions: expected an N x K matrix")
    return np.argmax(a, axis=1)


@dataclass(frozen=True)
class ConfusionMatrix:
    """K x K confusion matrix with its form and flavor.

    ``form`` is ``"conditional"`` (columns are ``p(D | Y=k)``) or
    ``"joint"`` (all entries sum to one). ``flavor`` records whether it
    was counted from hard decisions or averaged from soft outputs.
    """

    values: np.ndarray
    form: str = "conditional"
    flavor: str = "hard"

    def __post_init__(self):
        a = np.asarray(self.values, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DomainError(f"ConfusionMatrix: must be square K x K, got shape {a.shape}")
        if self.form not in ("conditional", "joint"):
            raise DomainError(f"ConfusionMatrix: unknown form {self.form!r}")
        if self.flavor not in ("hard", "soft"):
            raise DomainError(f"ConfusionMatrix: unknown flavor {self.flavor!r}")
        if not np.all(np.isfinite(a)):
            raise DomainError("ConfusionMatrix: all entries must be finite")
        if np.any(a < 0):
            raise DomainError("ConfusionMatrix: all entries must be >= 0")
        if self.form == "conditional":
            if np.max(np.abs(a.sum(axis=0) - 1.0)) > INGEST_TOL:
                raise DomainError("ConfusionMatrix: each column must sum to 1 (conditional form)")
        elif abs(a.sum() - 1.0) > INGEST_TOL:
            raise DomainError("ConfusionMatrix: entries must sum to 1 (joint form)")
        object.__setattr__(self, "values", _frozen(a))

    @property
    def n_classes(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class EstimationReport:
    """Outcome of one estimator run.

    ``kind`` is ``"priors"`` or ``"weights"`` (prior ratio); ``trace`` is a
    tuple of ``(iteration, objective)`` pairs, empty for closed-form
    methods.
    """

    method: str
    estimate: np.ndarray
    kind: str = "priors"
    trace: tuple = ()
    termination: str = "converged"
    wall_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "estimate", _frozen(np.asarray(self.estimate, dtype=np.float64)))
        object.__setattr__(self, "trace", tuple((int(i), float(f)) for i, f in self.trace))
        if self.kind not in ("priors", "weights"):
            raise DomainError(f"EstimationReport: unknown kind {self.kind!r}")
        if self.termination not in ("converged", "max_iters"):
            raise DomainError(f"EstimationReport: unknown termination {self.termination!r}")

    @property
    def in_simplex(self):
        """True when the estimate is a valid prior vector."""
        return self.kind == "priors" and bool(np.all(self.estimate >= 0))

    def to_dict(self):
        return {
            "method": self.method,
            "kind": self.kind,
            "K": int(self.estimate.size),
            self.kind: self.estimate.tolist(),
            "in_simplex": self.in_simplex,
            "trace": [[i, f] for i, f in self.trace],
            "termination": self.termination,
            "wall_seconds": self.wall_seconds,
            **self.extra,
        }
