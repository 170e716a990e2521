"""Euclidean projection onto the probability simplex."""

import numpy as np

from .core import DomainError

_SNAP = 1e-15
# points this close to unit mass are already projected (keeps idempotence exact)
_ON_SIMPLEX = 4 * np.finfo(float).eps


def project_to_simplex(v):
    """Project ``v`` onto ``{w : w >= 0, sum(w) = 1}`` in the L2 sense.

    Sort-and-threshold algorithm, O(K log K). Entries below 1e-15 are
    snapped to zero and the remaining mass renormalized, so the output
    never carries negative round-off.

    Parameters
    ----------
    v : (K,) array_like
        Finite vector to project.

    Returns
    -------
    w : (K,) ndarray
        The closest point of the simplex to ``v``.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DomainError("project_to_simplex: expected a nonempty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise DomainError("project_to_simplex: entries must be finite")
    if np.all(v >= 0) and abs(v.sum() - 1.0) <= _ON_SIMPLEX * v.size:
        return v.copy()
    # shifting by the max keeps the threshold arithmetic well scaled
    v = v - v.max()
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - cssv / ind > 0)[0][-1]
    theta = cssv[rho] / (rho + 1.0)
    w = np.maximum(v - theta, 0.0)
    w[w < _SNAP] = 0.0
    return w / w.sum()
