"""End-to-end helpers: estimate, adapt, evaluate, and the sample-size sweep."""

from dataclasses import replace

import numpy as np

from .adaptation import (adapt_predictions, adapt_predictions_ratio,
                         clip_to_simplex, evaluate_accuracy)
from .core import DomainError, as_label_vector, as_prediction_matrix
from .estimators import run_estimator
from .synth import classifier_predictions, generate_dataset, resample_to_priors


def adapt_with_report(preds, report, train_priors):
    """Apply an estimator's output to ``preds``.

    Ratio estimates go through :func:`adapt_predictions_ratio`; prior
    estimates outside the simplex are clamped first.
    """
    if report.kind == "weights":
        return adapt_predictions_ratio(preds, report.estimate)
    return adapt_predictions(preds, train_priors, clip_to_simplex(report.estimate))


def estimate_and_adapt(method, ctx, preds=None):
    """Run ``method`` on ``ctx`` and adapt ``preds`` (default: the test predictions)."""
    report = run_estimator(method, ctx)
    target = ctx.test_preds if preds is None else preds
    tp = ctx.resolved_train_priors() if report.kind == "priors" else None
    return report, adapt_with_report(target, report, tp)


def sample_size_sweep(methods, ctx, test_labels, sizes, repeats, seed=0):
    """Accuracy on the full test set after estimating priors on subsamples.

    For every size and repeat a seeded subsample of ``ctx.test_preds`` is
    drawn without replacement, priors are estimated on it, and the full
    test set is adapted and scored. Each ``(size, repeat)`` pair gets its
    own seed stream keyed on ``(seed, size)``, so results for one size do
    not depend on which other sizes are requested.

    Returns a list of ``(size, method, accuracies)`` tuples.
    """
    full = as_prediction_matrix(ctx.test_preds)
    y = as_label_vector(test_labels, full.shape[1])
    n = full.shape[0]
    if y.size != n:
        raise DomainError("sample_size_sweep: test predictions and labels differ in length")
    sizes = [int(s) for s in sizes]
    for s in sizes:
        if not 1 <= s <= n:
            raise DomainError(f"sample_size_sweep: size {s} outside [1, {n}]")
    if repeats < 1:
        raise DomainError("sample_size_sweep: repeats must be >= 1")
    if seed < 0:
        raise DomainError("sample_size_sweep: seed must be >= 0")

    rows = []
    for size in sizes:
        seq = np.random.SeedSequence([seed, size])
        rngs = [np.random.default_rng(s) for s in seq.spawn(repeats)]
        subsets = [np.arange(n) if size == n else np.sort(rng.choice(n, size, replace=False))
                   for rng in rngs]
        for method in methods:
            accs = np.empty(repeats)
            for r, idx in enumerate(subsets):
                sub_ctx = replace(ctx, test_preds=full[idx])
                _, adapted = estimate_and_adapt(method, sub_ctx, preds=full)
                accs[r] = evaluate_accuracy(adapted, y)
            rows.append((size, method, accs))
    return rows


def make_splits(pair, clf, train_priors=(0.5, 0.5), test_priors=(0.5, 0.5),
                n_train=10_000, n_val=5_000, n_test=20_000, seed=0):
    """Synthetic train/validation/test splits for one classifier.

    Train and validation splits follow ``train_priors``. The test split is
    resampled to exact per-class counts from a balanced pool, the same way
    shifted test sets are built from a full test set.

    Returns ``{split: {"x", "y", "preds", "logits"}}``.
    """
    ss = np.random.SeedSequence(seed).spawn(4)
    seeds = [int(s.generate_state(1)[0]) for s in ss]
    out = {}
    for name, n, s in (("train", n_train, seeds[0]), ("val", n_val, seeds[1])):
        x, y = generate_dataset(pair, train_priors, n, s)
        out[name] = (x, y)
    pool_x, pool_y = generate_dataset(pair, (0.5, 0.5), int(np.ceil(2.2 * n_test)), seeds[2])
    out["test"] = resample_to_priors(pool_x, pool_y, test_priors, n_test, seeds[3])
    splits = {}
    for name, (x, y) in out.items():
        preds, logits = classifier_predictions(clf, x)
        splits[name] = {"x": x, "y": np.asarray(y), "preds": preds, "logits": logits}
    return splits
