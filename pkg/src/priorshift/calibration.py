"""Temperature scaling (TS) and bias-corrected temperature scaling (BCTS).

Both calibrators are fit by minimizing the average negative
log-likelihood of validation labels under ``softmax(z / T + b)``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import log_softmax, softmax

from .core import (DomainError, NumericalError, PriorShiftWarning, _frozen,
                   as_label_vector, as_logit_matrix)

T_MIN = 1e-3
T_MAX = 1e3
_LOG_T_BOUNDS = (np.log(T_MIN), np.log(T_MAX))


@dataclass(frozen=True)
class CalibrationParams:
    temperature: float = 1.0
    biases: np.ndarray = None

    def __post_init__(self):
        if not (np.isfinite(self.temperature) and self.temperature > 0):
            raise DomainError("CalibrationParams: temperature must be > 0")
        if self.biases is not None:
            b = np.asarray(self.biases, dtype=np.float64)
            if b.ndim != 1 or not np.all(np.isfinite(b)):
                raise DomainError("CalibrationParams: biases must be a finite vector")
            object.__setattr__(self, "biases", _frozen(b))
        object.__setattr__(self, "temperature", float(self.temperature))

    def bias_vector(self, n_classes):
        if self.biases is None:
            return np.zeros(n_classes)
        if self.biases.size != n_classes:
            raise DomainError(
                f"CalibrationParams: {self.biases.size} biases for K={n_classes} classes")
        return np.asarray(self.biases)

    @classmethod
    def identity(cls, n_classes):
        return cls(1.0, np.zeros(n_classes))


def apply_calibration(z, params):
    """Calibrated posteriors ``softmax(z / T + b)`` row by row."""
    z = as_logit_matrix(z)
    b = params.bias_vector(z.shape[1])
    return softmax(z / params.temperature + b, axis=1)


def calibration_nll(z, y, temperature, biases=None):
    """Average negative log-likelihood of ``y`` under calibrated logits."""
    z = np.asarray(z, dtype=np.float64)
    b = np.zeros(z.shape[1]) if biases is None else np.asarray(biases, dtype=np.float64)
    logp = log_softmax(z / temperature + b, axis=1)
    return float(-np.mean(logp[np.arange(len(y)), y]))


def calibration_nll_grad(z, y, temperature, biases=None):
    """Gradient of :func:`calibration_nll` as ``(d/dT, d/db)``."""
    z = np.asarray(z, dtype=np.float64)
    n, k = z.shape
    b = np.zeros(k) if biases is None else np.asarray(biases, dtype=np.float64)
    g = softmax(z / temperature + b, axis=1)
    g[np.arange(n), y] -= 1.0
    g /= n
    d_temp = float(np.sum(g * z)) * (-1.0 / temperature ** 2)
    return d_temp, g.sum(axis=0)


def _fit(z, y, fit_bias, fixed_temperature=None, max_iters=10_000, tol=1e-12):
    z = as_logit_matrix(z)
    n, k = z.shape
    y = as_label_vector(y, k)
    if y.size != n:
        raise DomainError(f"calibration: {n} logit rows but {y.size} labels")
    fit_temp = fixed_temperature is None

    # theta = [log T, b_0 .. b_{K-2}]; b_{K-1} is pinned to 0
    def unpack(theta):
        t = np.exp(theta[0]) if fit_temp else fixed_temperature
        b = np.zeros(k)
        if fit_bias:
            b[:-1] = theta[1:]
        return t, b

    def objective(theta):
        t, b = unpack(theta)
        return calibration_nll(z, y, t, b)

    def gradient(theta):
        t, b = unpack(theta)
        d_temp, d_b = calibration_nll_grad(z, y, t, b)
        g = np.zeros_like(theta)
        if fit_temp:
            g[0] = d_temp * t
        if fit_bias:
            g[1:] = d_b[:-1]
        return g

    n_params = (1 if fit_temp else 0) + (k - 1 if fit_bias else 0)
    if n_params == 0:
        return CalibrationParams(fixed_temperature, np.zeros(k))
    trace = []

    def fun(theta):
        f = objective(theta)
        g = gradient(theta)
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            raise NumericalError("calibration: non-finite objective or gradient", trace)
        trace.append(f)
        return f, g

    bounds = [_LOG_T_BOUNDS] + [(None, None)] * (k - 1 if fit_bias else 0)
    res = optimize.minimize(fun, np.zeros(1 + (k - 1 if fit_bias else 0)), jac=True,
                            method="L-BFGS-B", bounds=bounds,
                            options={"maxiter": max_iters, "ftol": tol, "gtol": 1e-12})
    theta = res.x
    if not fit_temp:
        theta[0] = np.log(fixed_temperature)

    t, b = unpack(theta)
    if fit_temp and (theta[0] <= _LOG_T_BOUNDS[0] or theta[0] >= _LOG_T_BOUNDS[1]):
        warnings.warn(f"calibration: temperature clamped at {t:g}; validation set may be degenerate",
                      PriorShiftWarning, stacklevel=3)
    return CalibrationParams(t, b)


def fit_temperature(z, y, **kwargs):
    """Fit a single temperature on validation logits ``z`` and labels ``y``.

    L-BFGS-B on ``log T``, starting from ``T = 1``. ``T`` is kept in
    ``[1e-3, 1e3]``; hitting either bound emits a :class:`PriorShiftWarning`.
    """
    return _fit(z, y, fit_bias=False, **kwargs)


def fit_bcts(z, y, fixed_temperature=None, **kwargs):
    """Fit temperature and class biases jointly (BCTS).

    The last class bias is pinned to zero, since softmax ignores a common
    shift of all biases. Pass ``fixed_temperature`` to fit biases only.
    """
    z = as_logit_matrix(z)
    if z.shape[0] < z.shape[1] + 1:
        raise DomainError("fit_bcts: needs at least K + 1 validation rows")
    return _fit(z, y, fit_bias=True, fixed_temperature=fixed_temperature, **kwargs)


def fit_calibration(z, y, mode):
    """Dispatch on ``mode`` in ``{"none", "ts", "bcts"}``."""
    if mode == "none":
        return CalibrationParams.identity(np.shape(z)[1])
    if mode == "ts":
        return fit_temperature(z, y)
    if mode == "bcts":
        return fit_bcts(z, y)
    raise DomainError(f"unknown calibration mode {mode!r}; expected none, ts or bcts")


def probabilities_to_logits(p, floor=1e-12):
    """Entrywise log with a floor; valid logits up to a per-row constant."""
    return np.log(np.maximum(np.asarray(p, dtype=np.float64), floor))
