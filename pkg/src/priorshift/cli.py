"""Command-line front end.

Subcommands: calibrate, estimate, adapt, evaluate, synth, sweep.
Exit codes: 0 success, 2 usage error, 3 data/parse error, 4 numerical error.
Warnings go to stderr, results to stdout (or ``--out``).
"""

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import fileio
from .adaptation import (estimate_train_priors_counts,
                         estimate_train_priors_predictions, evaluate_accuracy)
from .calibration import (CalibrationParams, apply_calibration,
                          calibration_nll, fit_calibration,
                          probabilities_to_logits)
from .core import (DomainError, EstimationReport, NumericalError,
                   PriorShiftWarning, as_label_vector)
from .estimators import (ESTIMATORS, DirichletHyperPrior, EstimationContext,
                         SolverOptions, UnknownEstimatorError, select_estimator)
from .pipeline import adapt_with_report, make_splits, sample_size_sweep
from .synth import (GaussianPair, LogisticClassifier, true_confusion_matrix,
                    true_soft_confusion_matrix)

EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 2, 3, 4


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _shared_parser():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--method", default="scm-l",
                   help="estimator name or comma-separated list (sweep); one of: " + ", ".join(ESTIMATORS))
    p.add_argument("--alpha", type=float, default=3.0, help="Dirichlet concentration for MAP methods")
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--calibration", choices=["none", "ts", "bcts"], default="none")
    p.add_argument("--calibration-params", help="JSON from 'calibrate', applied to every prediction file")
    p.add_argument("--train-priors", default="predictions",
                   help="'counts', 'predictions', or a priors JSON file")
    p.add_argument("--train-preds", help="training predictions/logits CSV (for --train-priors predictions)")
    p.add_argument("--train-labels", help="training labels CSV (for --train-priors counts)")
    p.add_argument("--hard-counts", action="store_true",
                   help="scm-l/scm-m: use hard decision counts instead of soft decision mass")
    p.add_argument("--out", help="output file (default: stdout)")
    return p


def build_parser():
    shared = _shared_parser()
    parser = argparse.ArgumentParser(prog="priorshift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", parents=[shared], help="fit TS/BCTS on validation logits")
    p.add_argument("--val-logits", required=True, help="validation logits (or probabilities) CSV")
    p.add_argument("--val-labels", required=True)

    p = sub.add_parser("estimate", parents=[shared], help="estimate test priors or prior ratio")
    p.add_argument("--val-preds", help="validation predictions/logits CSV")
    p.add_argument("--val-labels")
    p.add_argument("--test-preds", required=True)
    p.add_argument("--true-priors", help="ground-truth priors JSON (method 'oracle')")

    p = sub.add_parser("adapt", parents=[shared], help="adapt test predictions to new priors")
    p.add_argument("--test-preds", required=True)
    p.add_argument("--val-preds")
    p.add_argument("--val-labels")
    p.add_argument("--new-priors", required=True, help="priors/weights JSON or an estimate report")

    p = sub.add_parser("evaluate", parents=[shared], help="accuracy of predictions against labels")
    p.add_argument("--preds", required=True)
    p.add_argument("--labels", required=True)

    p = sub.add_parser("synth", parents=[shared], help="write the two-Gaussian testbed to files")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--a", type=float, default=1.0, help="classifier slope")
    p.add_argument("--b", type=float, default=0.0, help="classifier intercept")
    p.add_argument("--mean0", type=float, default=-2.0)
    p.add_argument("--mean1", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--train-dist", type=_float_list, default=[0.5, 0.5])
    p.add_argument("--test-dist", type=_float_list, default=[0.9, 0.1])
    p.add_argument("--n-train", type=int, default=10_000)
    p.add_argument("--n-val", type=int, default=5_000)
    p.add_argument("--n-test", type=int, default=20_000)

    p = sub.add_parser("sweep", parents=[shared], help="accuracy vs. number of samples used for estimation")
    p.add_argument("--val-preds")
    p.add_argument("--val-labels")
    p.add_argument("--test-preds", required=True)
    p.add_argument("--test-labels", required=True)
    p.add_argument("--true-priors")
    p.add_argument("--sizes", type=_int_list, required=True)
    p.add_argument("--repeats", type=int, default=20)
    return parser


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# input helpers

def _load_scores(path, params):
    kind, values = fileio.read_matrix(path)
    if params is None:
        if kind == "z":
            return apply_calibration(values, CalibrationParams.identity(values.shape[1]))
        return values
    logits = values if kind == "z" else probabilities_to_logits(values)
    return apply_calibration(logits, params)


def _load_logits(path):
    kind, values = fileio.read_matrix(path)
    return values if kind == "z" else probabilities_to_logits(values)


def _calibration(args, val_labels):
    """Resolve the calibration to apply: a params file, a fit on validation data, or none."""
    if args.calibration_params:
        return fileio.read_calibration(args.calibration_params)
    if args.calibration == "none":
        return None
    if not (getattr(args, "val_preds", None) and val_labels is not None):
        raise UsageError(f"--calibration {args.calibration} needs --val-preds and --val-labels")
    z = _load_logits(args.val_preds)
    return fit_calibration(z, as_label_vector(val_labels, z.shape[1]), args.calibration)


def _labels(path, n_rows, other):
    y = fileio.read_labels(path)
    if y.size != n_rows:
        raise DomainError(f"row count mismatch: {path} has {y.size} labels, {other} has {n_rows} rows")
    return y


def _train_priors(args, params, val_preds=None, val_labels=None):
    mode = args.train_priors
    if mode == "counts":
        if args.train_labels:
            y = fileio.read_labels(args.train_labels)
        elif val_labels is not None:
            y = val_labels
        else:
            raise UsageError("--train-priors counts needs --train-labels or --val-labels")
        k = val_preds.shape[1] if val_preds is not None else int(y.max()) + 1
        return estimate_train_priors_counts(y, k)
    if mode == "predictions":
        if args.train_preds:
            return estimate_train_priors_predictions(_load_scores(args.train_preds, params))
        if val_preds is not None:
            return estimate_train_priors_predictions(val_preds)
        raise UsageError("--train-priors predictions needs --train-preds or --val-preds")
    kind, vec = fileio.read_vector_file(mode)
    if kind != "priors":
        raise DomainError(f"{mode}: expected a priors file, found {kind}")
    return vec


def _options(args):
    return SolverOptions(max_iters=args.max_iters, tol=args.tol, seed=args.seed)


def _context(args, test_preds):
    val_labels_raw = fileio.read_labels(args.val_labels) if getattr(args, "val_labels", None) else None
    params = _calibration(args, val_labels_raw)
    val_preds = val_labels = None
    if getattr(args, "val_preds", None):
        val_preds = _load_scores(args.val_preds, params)
        if val_labels_raw is not None:
            if val_labels_raw.size != val_preds.shape[0]:
                raise DomainError(f"row count mismatch: {args.val_labels} has {val_labels_raw.size} "
                                  f"labels, {args.val_preds} has {val_preds.shape[0]} rows")
            val_labels = val_labels_raw
    test = _load_scores(test_preds, params)
    if val_preds is not None and val_preds.shape[1] != test.shape[1]:
        raise DomainError(f"class count mismatch: {args.val_preds} has K={val_preds.shape[1]}, "
                          f"{test_preds} has K={test.shape[1]}")
    true_priors = None
    if getattr(args, "true_priors", None):
        true_priors = fileio.read_vector_file(args.true_priors)[1]
    ctx = EstimationContext(
        test_preds=test, val_preds=val_preds, val_labels=val_labels,
        train_priors=_train_priors(args, params, val_preds, val_labels),
        true_priors=true_priors, hyper=DirichletHyperPrior(args.alpha),
        options=_options(args), soft_counts=not args.hard_counts)
    return ctx, params


def _emit(args, text):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_calibrate(args):
    z = _load_logits(args.val_logits)
    y = _labels(args.val_labels, z.shape[0], args.val_logits)
    y = as_label_vector(y, z.shape[1])
    params = fit_calibration(z, y, args.calibration)
    before = calibration_nll(z, y, 1.0)
    after = calibration_nll(z, y, params.temperature, params.bias_vector(z.shape[1]))
    obj = {"K": z.shape[1], "mode": args.calibration, "temperature": params.temperature,
           "biases": [float(v) for v in params.bias_vector(z.shape[1])],
           "nll_before": before, "nll_after": after}
    if args.out:
        fileio.write_json(args.out, obj)
        print(f"nll_before={before:.10g} nll_after={after:.10g}")
    else:
        print(json.dumps(obj, indent=2))
    return 0


def cmd_estimate(args):
    estimator = select_estimator(args.method)
    ctx, _ = _context(args, args.test_preds)
    report = estimator(ctx)
    if report.kind == "priors" and not report.in_simplex:
        warnings.warn(f"{args.method}: estimate {report.estimate.tolist()} lies outside the simplex",
                      PriorShiftWarning)
    _emit(args, json.dumps(report.to_dict(), indent=2) + "\n")
    return 0


def cmd_adapt(args):
    if not args.out:
        raise UsageError("adapt needs --out for the adapted predictions CSV")
    kind, vec = fileio.read_vector_file(args.new_priors)
    val_labels = fileio.read_labels(args.val_labels) if args.val_labels else None
    params = _calibration(args, val_labels)
    test = _load_scores(args.test_preds, params)
    train_priors = None
    if kind == "priors":
        val_preds = _load_scores(args.val_preds, params) if args.val_preds else None
        train_priors = _train_priors(args, params, val_preds, val_labels)
    adapted = adapt_with_report(test, EstimationReport("file", vec, kind), train_priors)
    fileio.write_matrix(args.out, adapted, "p")
    return 0


def cmd_evaluate(args):
    params = _calibration(args, None) if args.calibration_params else None
    preds = _load_scores(args.preds, params)
    y = _labels(args.labels, preds.shape[0], args.preds)
    acc = evaluate_accuracy(preds, y)
    _emit(args, json.dumps({"accuracy": acc, "n": int(y.size)}) + "\n")
    return 0


def cmd_synth(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pair = GaussianPair(args.mean0, args.mean1, args.sigma)
    clf = LogisticClassifier(args.a, args.b)
    splits = make_splits(pair, clf, args.train_dist, args.test_dist,
                         args.n_train, args.n_val, args.n_test, args.seed)
    for name, split in splits.items():
        fileio.write_matrix(out / f"{name}_preds.csv", split["preds"], "p")
        fileio.write_matrix(out / f"{name}_logits.csv", split["logits"], "z")
        fileio.write_labels(out / f"{name}_labels.csv", split["y"])
    cms = {"K": 2, "hard": true_confusion_matrix(pair, clf).values.tolist()}
    cms["soft"] = true_soft_confusion_matrix(pair, clf).values.tolist()
    fileio.write_json(out / "true_cm.json", cms)
    fileio.write_vector_file(out / "train_priors.json", "priors", np.asarray(args.train_dist) / sum(args.train_dist))
    fileio.write_vector_file(out / "test_priors.json", "priors", np.asarray(args.test_dist) / sum(args.test_dist))
    print(str(out))
    return 0


def cmd_sweep(args):
    methods = [m.strip() for m in args.method.split(",") if m.strip()]
    for m in methods:
        select_estimator(m)
    ctx, _ = _context(args, args.test_preds)
    y = _labels(args.test_labels, ctx.test_preds.shape[0], args.test_preds)
    rows = sample_size_sweep(methods, ctx, y, args.sizes, args.repeats, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["size", "method", "mean_accuracy", "std_accuracy", "median_accuracy"])
    for size, method, accs in rows:
        w.writerow([size, method, repr(float(accs.mean())), repr(float(accs.std())),
                    repr(float(np.median(accs)))])
    _emit(args, buf.getvalue())
    return 0


COMMANDS = {
    "calibrate": cmd_calibrate,
    "estimate": cmd_estimate,
    "adapt": cmd_adapt,
    "evaluate": cmd_evaluate,
    "synth": cmd_synth,
    "sweep": cmd_sweep,
}


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("always", PriorShiftWarning)
        warnings.showwarning = _show_warning
        try:
            return COMMANDS[args.command](args)
        except (UsageError, UnknownEstimatorError) as exc:
            print(f"usage error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except NumericalError as exc:
            print(f"numerical error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        except DomainError as exc:
            print(f"data error: {exc}", file=sys.stderr)
            return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
