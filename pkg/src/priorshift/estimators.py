"""Estimators of test-time class priors and prior ratios.

Three families live here:

* closed-form matrix inversion (``cm``/``scm`` priors, ``bbse``/``bbse-s``
  prior ratios), which may leave the simplex;
* maximizers of the likelihood of the classifier's posterior outputs
  (EM, projected gradient ascent, and its Dirichlet MAP variant);
* maximizers of the multinomial likelihood of the classifier's decisions
  given a confusion matrix (``cm-l``/``scm-l`` and the MAP ``cm-m``/``scm-m``),
  which always return a valid prior vector, even for singular matrices.

All iterative methods start from uniform priors and record a monotone
objective trace in the returned :class:`~priorshift.core.EstimationReport`.
"""

import time
from dataclasses import dataclass

import numpy as np

from .confusion import (conditional_to_joint, decision_counts,
                        decision_rates_hard, decision_rates_soft,
                        estimate_cm_hard, estimate_cm_soft,
                        soft_decision_mass)
from .core import (ConfusionMatrix, DomainError, EstimationReport,
                   NumericalError, SingularMatrixError,
                   as_decision_counts, as_prediction_matrix, as_prior_vector,
                   as_unconstrained_estimate)
from .simplex import project_to_simplex

MAX_CONDITION = 1e12
_MAX_HALVINGS = 60


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 10_000
    tol: float = 1e-10
    step_init: float = 0.1
    epsilon_floor: float = 1e-12
    seed: int = 0  # reserved; every solver here is deterministic
    step_tol: float = 1e-9

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise DomainError("SolverOptions: max_iters must be >= 1")
        if not self.tol > 0:
            raise DomainError("SolverOptions: tol must be > 0")
        if not self.step_init > 0:
            raise DomainError("SolverOptions: step_init must be > 0")
        if not 0 < self.epsilon_floor <= 1e-6:
            raise DomainError("SolverOptions: epsilon_floor must lie in (0, 1e-6]")
        if not self.step_tol > 0:
            raise DomainError("SolverOptions: step_tol must be > 0")


@dataclass(frozen=True)
class DirichletHyperPrior:
    """Symmetric Dirichlet hyper-prior ``Dir(alpha)`` on the priors."""

    alpha: float = 3.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError("DirichletHyperPrior: alpha must be > 0")


# ---------------------------------------------------------------------------
# closed-form inversion

def _solve(matrix, rhs, what):
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrixError(
            f"{what}: confusion matrix is singular or ill-conditioned (cond={cond:.3g}); "
            "use a likelihood-based estimator such as cm-l or scm-l instead")
    return np.linalg.solve(matrix, rhs)


def estimate_priors_inversion(cm, decision_rates):
    """Solve ``C p(Y) = p(D)`` for the priors. The result may be negative."""
    if cm.form != "conditional":
        raise DomainError("estimate_priors_inversion: expects a conditional confusion matrix")
    rates = np.asarray(decision_rates, dtype=np.float64)
    if rates.shape != (cm.n_classes,):
        raise DomainError("estimate_priors_inversion: decision rates do not match K")
    return as_unconstrained_estimate(_solve(cm.values, rates, "estimate_priors_inversion"))


def estimate_ratio_bbse(cm_joint, decision_rates):
    """Solve ``C_{d,y} w = p(D)`` for the prior ratio ``w = p_E(Y) / p_T(Y)``."""
    if cm_joint.form != "joint":
        raise DomainError("estimate_ratio_bbse: expects a joint confusion matrix")
    rates = np.asarray(decision_rates, dtype=np.float64)
    if rates.shape != (cm_joint.n_classes,):
        raise DomainError("estimate_ratio_bbse: decision rates do not match K")
    return _solve(cm_joint.values, rates, "estimate_ratio_bbse")


# ---------------------------------------------------------------------------
# objectives and gradients

def _likelihood_ratios(test_preds, train_priors, eps):
    return np.asarray(test_preds) / np.maximum(np.asarray(train_priors), eps)


def posterior_log_likelihood(priors, test_preds, train_priors, epsilon_floor=1e-12):
    """Log-likelihood of the test outputs under candidate test priors.

    ``sum_i log sum_k P_k f_k(x_i) / p_T(k)``, up to a constant.
    """
    r = _likelihood_ratios(test_preds, train_priors, epsilon_floor)
    return float(np.sum(np.log(np.maximum(r @ priors, epsilon_floor))))


def posterior_log_likelihood_grad(priors, test_preds, train_priors, epsilon_floor=1e-12):
    r = _likelihood_ratios(test_preds, train_priors, epsilon_floor)
    return r.T @ (1.0 / np.maximum(r @ priors, epsilon_floor))


def dirichlet_log_density(priors, alpha, epsilon_floor=1e-12):
    """Unnormalized log-density of a symmetric Dirichlet."""
    return float((alpha - 1.0) * np.sum(np.log(np.maximum(priors, epsilon_floor))))


def dirichlet_log_density_grad(priors, alpha, epsilon_floor=1e-12):
    return (alpha - 1.0) / np.maximum(priors, epsilon_floor)


def cm_log_likelihood(priors, cm, counts, epsilon_floor=1e-12):
    """Multinomial log-likelihood of decision counts given test priors.

    ``sum_k n_k log(c_k . P)`` where ``c_k`` is row ``k`` of the
    conditional confusion matrix; the multinomial coefficient is dropped.
    """
    c = cm.values if isinstance(cm, ConfusionMatrix) else np.asarray(cm)
    n = np.asarray(counts, dtype=np.float64)
    q = np.maximum(c @ np.asarray(priors, dtype=np.float64), epsilon_floor)
    active = n > 0
    return float(np.sum(n[active] * np.log(q[active])))


def cm_log_likelihood_grad(priors, cm, counts, epsilon_floor=1e-12):
    c = cm.values if isinstance(cm, ConfusionMatrix) else np.asarray(cm)
    n = np.asarray(counts, dtype=np.float64)
    q = np.maximum(c @ np.asarray(priors, dtype=np.float64), epsilon_floor)
    return c.T @ (n / q)


# ---------------------------------------------------------------------------
# solvers

def _projected_gradient_ascent(objective, gradient, k, scale, opts):
    """Maximize a concave objective over the simplex.

    The ascent direction is the gradient divided by ``scale`` (the number
    of observations), so ``step_init`` is a per-sample step. Each
    iteration starts from ``step_init`` and halves until the projected
    point does not decrease the objective. Stops once an iteration raises
    the objective by less than ``opts.tol`` while moving no prior by more
    than ``opts.step_tol``.
    """
    p = np.full(k, 1.0 / k)
    f = objective(p)
    trace = [(0, f)]
    for it in range(1, opts.max_iters + 1):
        g = gradient(p) / scale
        if not np.all(np.isfinite(g)):
            raise NumericalError("projected gradient ascent: non-finite gradient", trace)
        step = opts.step_init
        for _ in range(_MAX_HALVINGS):
            cand = project_to_simplex(p + step * g)
            f_new = objective(cand)
            if np.isnan(f_new):
                raise NumericalError("projected gradient ascent: objective is NaN", trace)
            if f_new >= f:
                break
            step *= 0.5
        else:
            # no ascent at machine precision: p is stationary
            return p, trace, "converged"
        if np.array_equal(cand, p):
            return p, trace, "converged"
        change = f_new - f
        moved = np.max(np.abs(cand - p))
        p, f = cand, f_new
        trace.append((it, f))
        if change < opts.tol and moved < opts.step_tol:
            return p, trace, "converged"
    return p, trace, "max_iters"


def _report(method, estimate, start, trace=(), termination="converged", kind="priors", **extra):
    return EstimationReport(method, estimate, kind, tuple(trace), termination,
                            time.perf_counter() - start, extra)


def _posterior_inputs(test_preds, train_priors, allow_empty=False):
    preds = as_prediction_matrix(test_preds, allow_empty=allow_empty)
    tp = as_prior_vector(train_priors)
    if tp.size != preds.shape[1]:
        raise DomainError("train priors do not match the number of prediction columns")
    return preds, tp


def estimate_priors_em(test_preds, train_priors, opts=SolverOptions()):
    """EM re-estimation of test priors from posterior outputs.

    Alternates re-weighting the posteriors by ``P / p_T`` (E-step) and
    averaging them (M-step), from uniform priors, until the largest prior
    change drops below ``opts.tol``.
    """
    start = time.perf_counter()
    preds, tp = _posterior_inputs(test_preds, train_priors)
    eps = opts.epsilon_floor
    r = _likelihood_ratios(preds, tp, eps)
    k = preds.shape[1]
    p = np.full(k, 1.0 / k)
    trace = [(0, posterior_log_likelihood(p, preds, tp, eps))]
    termination = "max_iters"
    for it in range(1, opts.max_iters + 1):
        weighted = r * p
        posterior = weighted / np.maximum(weighted.sum(axis=1, keepdims=True), eps)
        p_new = posterior.mean(axis=0)
        p_new /= p_new.sum()
        f = posterior_log_likelihood(p_new, preds, tp, eps)
        if not np.isfinite(f):
            raise NumericalError("EM: non-finite log-likelihood", trace)
        trace.append((it, f))
        delta = np.max(np.abs(p_new - p))
        p = p_new
        if delta < opts.tol:
            termination = "converged"
            break
    return p, _report("em", p, start, trace, termination)


def estimate_priors_mle_pga(test_preds, train_priors, opts=SolverOptions()):
    """Maximize the posterior log-likelihood by projected gradient ascent."""
    start = time.perf_counter()
    preds, tp = _posterior_inputs(test_preds, train_priors)
    eps = opts.epsilon_floor
    p, trace, term = _projected_gradient_ascent(
        lambda q: posterior_log_likelihood(q, preds, tp, eps),
        lambda q: posterior_log_likelihood_grad(q, preds, tp, eps),
        preds.shape[1], max(preds.shape[0], 1), opts)
    return p, _report("mle-pga", p, start, trace, term)


def estimate_priors_map_pga(test_preds, train_priors, hyper=DirichletHyperPrior(), opts=SolverOptions()):
    """MAP test priors under a symmetric Dirichlet hyper-prior.

    The hyper-prior gradient ``(alpha - 1) / P_k`` is added to the
    likelihood gradient before projection. With no test rows the result
    is the Dirichlet mode.
    """
    start = time.perf_counter()
    preds, tp = _posterior_inputs(test_preds, train_priors, allow_empty=True)
    eps, alpha = opts.epsilon_floor, hyper.alpha
    p, trace, term = _projected_gradient_ascent(
        lambda q: posterior_log_likelihood(q, preds, tp, eps) + dirichlet_log_density(q, alpha, eps),
        lambda q: (posterior_log_likelihood_grad(q, preds, tp, eps)
                   + dirichlet_log_density_grad(q, alpha, eps)),
        preds.shape[1], max(preds.shape[0], 1), opts)
    return p, _report("map-pga", p, start, trace, term, alpha=alpha)


def _cm_inputs(cm, counts):
    if cm.form != "conditional":
        raise DomainError("expects a conditional confusion matrix")
    n = as_decision_counts(counts)
    if n.size != cm.n_classes:
        raise DomainError("decision counts do not match K")
    return n


def estimate_priors_cm_mle(cm, counts, opts=SolverOptions()):
    """Constrained MLE of test priors from decision counts (CM^L / SCM^L).

    Maximizes ``sum_k n_k log(c_k . P)`` over the simplex by projected
    gradient ascent. No matrix inversion is involved, so singular
    confusion matrices and decision rates outside the feasible set are
    handled; the result is always a valid prior vector.
    """
    start = time.perf_counter()
    n = _cm_inputs(cm, counts)
    if not n.sum() > 0:
        raise DomainError("estimate_priors_cm_mle: needs at least one decision")
    eps = opts.epsilon_floor
    p, trace, term = _projected_gradient_ascent(
        lambda q: cm_log_likelihood(q, cm, n, eps),
        lambda q: cm_log_likelihood_grad(q, cm, n, eps),
        cm.n_classes, n.sum(), opts)
    return p, _report("cm-mle", p, start, trace, term)


def estimate_priors_cm_map(cm, counts, hyper=DirichletHyperPrior(), opts=SolverOptions()):
    """MAP counterpart of :func:`estimate_priors_cm_mle` (CM^M / SCM^M)."""
    start = time.perf_counter()
    n = _cm_inputs(cm, counts)
    eps, alpha = opts.epsilon_floor, hyper.alpha
    p, trace, term = _projected_gradient_ascent(
        lambda q: cm_log_likelihood(q, cm, n, eps) + dirichlet_log_density(q, alpha, eps),
        lambda q: cm_log_likelihood_grad(q, cm, n, eps) + dirichlet_log_density_grad(q, alpha, eps),
        cm.n_classes, max(n.sum(), 1.0), opts)
    return p, _report("cm-map", p, start, trace, term, alpha=alpha)


# ---------------------------------------------------------------------------
# registry

@dataclass(frozen=True)
class EstimationContext:
    """Everything an estimator may need; unused fields can stay ``None``.

    ``train_priors`` defaults to the average of ``train_preds`` when given,
    else to the average of ``val_preds`` (the validation split follows the
    training distribution). ``soft_counts`` selects whether the soft-CM
    likelihood estimators use soft decision mass (default) or hard counts.
    """

    test_preds: np.ndarray
    val_preds: np.ndarray = None
    val_labels: np.ndarray = None
    train_priors: np.ndarray = None
    train_preds: np.ndarray = None
    true_priors: np.ndarray = None
    hyper: DirichletHyperPrior = DirichletHyperPrior()
    options: SolverOptions = SolverOptions()
    soft_counts: bool = True

    def resolved_train_priors(self):
        if self.train_priors is not None:
            return as_prior_vector(self.train_priors)
        source = self.train_preds if self.train_preds is not None else self.val_preds
        if source is None:
            raise DomainError("train priors unavailable: pass train_priors, train_preds or val_preds")
        return as_prior_vector(as_prediction_matrix(source).mean(axis=0))

    def confusion(self, flavor):
        if self.val_preds is None or self.val_labels is None:
            raise DomainError("confusion-matrix methods need validation predictions and labels")
        fn = estimate_cm_hard if flavor == "hard" else estimate_cm_soft
        return fn(self.val_preds, self.val_labels)


def _inversion(flavor):
    def run(ctx):
        start = time.perf_counter()
        rates = decision_rates_hard if flavor == "hard" else decision_rates_soft
        p = estimate_priors_inversion(ctx.confusion(flavor), rates(ctx.test_preds))
        return _report("cm" if flavor == "hard" else "scm", p, start)
    return run


def _bbse(flavor):
    def run(ctx):
        start = time.perf_counter()
        joint = conditional_to_joint(ctx.confusion(flavor), ctx.resolved_train_priors())
        rates = decision_rates_hard if flavor == "hard" else decision_rates_soft
        w = estimate_ratio_bbse(joint, rates(ctx.test_preds))
        return _report("bbse" if flavor == "hard" else "bbse-s", w, start, kind="weights")
    return run


def _counts(ctx, flavor):
    if flavor == "soft" and ctx.soft_counts:
        return soft_decision_mass(ctx.test_preds)
    return decision_counts(ctx.test_preds)


def _cm_likelihood(flavor, use_map):
    name = ("cm" if flavor == "hard" else "scm") + ("-m" if use_map else "-l")

    def run(ctx):
        cm = ctx.confusion(flavor)
        n = _counts(ctx, flavor)
        if use_map:
            _, rep = estimate_priors_cm_map(cm, n, ctx.hyper, ctx.options)
        else:
            _, rep = estimate_priors_cm_mle(cm, n, ctx.options)
        return EstimationReport(name, rep.estimate, "priors", rep.trace, rep.termination,
                                rep.wall_seconds, rep.extra)
    return run


def _em(ctx):
    return estimate_priors_em(ctx.test_preds, ctx.resolved_train_priors(), ctx.options)[1]


def _mle_pga(ctx):
    return estimate_priors_mle_pga(ctx.test_preds, ctx.resolved_train_priors(), ctx.options)[1]


def _map_pga(ctx):
    return estimate_priors_map_pga(ctx.test_preds, ctx.resolved_train_priors(), ctx.hyper, ctx.options)[1]


def _oracle(ctx):
    if ctx.true_priors is None:
        raise DomainError("oracle estimator needs ground-truth test priors")
    return _report("oracle", as_prior_vector(ctx.true_priors), time.perf_counter())


def _no_adaptation(ctx):
    k = np.shape(ctx.test_preds)[1]
    return _report("none", np.ones(k), time.perf_counter(), kind="weights")


ESTIMATORS = {
    "cm": _inversion("hard"),
    "scm": _inversion("soft"),
    "cm-l": _cm_likelihood("hard", False),
    "scm-l": _cm_likelihood("soft", False),
    "cm-m": _cm_likelihood("hard", True),
    "scm-m": _cm_likelihood("soft", True),
    "em": _em,
    "mle-pga": _mle_pga,
    "map-pga": _map_pga,
    "bbse": _bbse("hard"),
    "bbse-s": _bbse("soft"),
    "oracle": _oracle,
    "none": _no_adaptation,
}


class UnknownEstimatorError(DomainError):
    pass


def select_estimator(name):
    """Look up an estimator by name.

    The returned callable takes an :class:`EstimationContext` and returns
    an :class:`~priorshift.core.EstimationReport`.
    """
    try:
        return ESTIMATORS[name]
    except KeyError:
        raise UnknownEstimatorError(
            f"unknown method {name!r}; valid methods: {', '.join(ESTIMATORS)}") from None


def run_estimator(name, ctx):
    return select_estimator(name)(ctx)
