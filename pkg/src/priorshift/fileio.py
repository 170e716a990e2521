"""File formats used by the command-line interface.

* prediction / logit matrices: headered CSV, columns ``p_0..p_{K-1}`` or
  ``z_0..z_{K-1}``;
* labels: single-column CSV with header ``y``;
* priors, weights, calibration parameters and reports: JSON objects
  carrying an explicit ``K``.

CSV floats are written with 17 significant digits and JSON floats with
Python's shortest round-trip repr, so a write/read cycle is bit-exact.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .calibration import CalibrationParams
from .core import DomainError


class DataFileError(DomainError):
    """A data file could not be parsed; the message carries file, line and column."""


def _where(path, line, col=None):
    return f"{path}:{line}" + (f":{col}" if col is not None else "")


def read_matrix(path):
    """Read a prediction or logit CSV; returns ``(kind, array)``.

    ``kind`` is ``"p"`` for probabilities or ``"z"`` for logits.
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataFileError(f"{path}: cannot open ({exc.strerror})") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataFileError(f"{_where(path, 1)}: missing header")
        kinds = {h.strip()[:2] for h in header}
        if len(kinds) != 1 or kinds.pop() not in ("p_", "z_"):
            raise DataFileError(f"{_where(path, 1)}: header must be p_0..p_K-1 or z_0..z_K-1")
        kind = header[0].strip()[0]
        expected = [f"{kind}_{i}" for i in range(len(header))]
        if [h.strip() for h in header] != expected:
            raise DataFileError(f"{_where(path, 1)}: expected header {','.join(expected)}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFileError(
                    f"{_where(path, line_no)}: expected {len(header)} columns, got {len(row)}")
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataFileError(
                        f"{_where(path, line_no, col)}: not a number: {cell!r}") from None
            rows.append(vals)
    return kind, np.array(rows, dtype=np.float64).reshape(-1, len(header))


def write_matrix(path, values, kind="p"):
    values = np.asarray(values, dtype=np.float64)
    header = ",".join(f"{kind}_{i}" for i in range(values.shape[1]))
    np.savetxt(path, values, fmt="%.17g", delimiter=",", header=header, comments="")


def read_labels(path):
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataFileError(f"{path}: cannot open ({exc.strerror})") from None
    if not lines or lines[0].strip() != "y":
        raise DataFileError(f"{_where(path, 1)}: header must be 'y'")
    labels = []
    for line_no, line in enumerate(lines[1:], start=2):
        cell = line.strip()
        if not cell:
            continue
        try:
            labels.append(int(cell))
        except ValueError:
            raise DataFileError(f"{_where(path, line_no, 1)}: not an integer label: {cell!r}") from None
    return np.array(labels, dtype=np.int64)


def write_labels(path, labels):
    np.savetxt(path, np.asarray(labels, dtype=np.int64), fmt="%d", header="y", comments="")


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise DataFileError(f"{path}: cannot open ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise DataFileError(f"{_where(path, exc.lineno, exc.colno)}: {exc.msg}") from None


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def _vector_field(obj, key, path):
    vals = obj[key]
    if not isinstance(vals, list) or not all(isinstance(v, (int, float)) for v in vals):
        raise DataFileError(f"{path}: field {key!r} must be a list of numbers")
    if "K" in obj and obj["K"] != len(vals):
        raise DataFileError(f"{path}: K={obj['K']} but {key!r} has {len(vals)} entries")
    return np.array(vals, dtype=np.float64)


def read_vector_file(path):
    """Read a priors or weights JSON (also accepts an estimation report).

    Returns ``(kind, vector)`` with ``kind`` in ``{"priors", "weights"}``.
    """
    obj = read_json(path)
    if not isinstance(obj, dict):
        raise DataFileError(f"{path}: expected a JSON object")
    for kind in ("priors", "weights"):
        if kind in obj:
            return kind, _vector_field(obj, kind, path)
    raise DataFileError(f"{path}: JSON object needs a 'priors' or 'weights' field")


def write_vector_file(path, kind, values):
    values = [float(v) for v in np.asarray(values).ravel()]
    write_json(path, {"K": len(values), kind: values})


def read_calibration(path):
    obj = read_json(path)
    try:
        t = float(obj["temperature"])
        b = _vector_field(obj, "biases", path)
        return CalibrationParams(t, b)
    except (KeyError, TypeError) as exc:
        raise DataFileError(f"{path}: calibration file needs 'temperature' and 'biases' ({exc})") from None


def write_calibration(path, params, n_classes, **extra):
    b = params.bias_vector(n_classes)
    write_json(path, {"K": n_classes, "temperature": params.temperature,
                      "biases": [float(v) for v in b], **extra})
