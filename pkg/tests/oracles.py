"""Independent reference computations used by the tests.

None of these share code with the package under test.
"""

import itertools

import numpy as np


def simplex_grid(k, step):
    """All points of the K-simplex whose coordinates are multiples of ``step``."""
    m = int(round(1 / step))
    if k == 1:
        return np.ones((1, 1))
    pts = []
    for cuts in itertools.combinations(range(m + k - 1), k - 1):
        parts = np.diff((-1,) + cuts + (m + k - 1,)) - 1
        pts.append(parts)
    return np.array(pts, dtype=float) / m


def project_by_active_sets(v):
    """Exact simplex projection by enumerating every support set.

    For support S the KKT point is ``v_S - (sum(v_S) - 1) / |S|``; the
    projection is the feasible candidate closest to ``v``.
    """
    v = np.asarray(v, dtype=float)
    k = v.size
    best, best_d = None, np.inf
    for r in range(1, k + 1):
        for support in itertools.combinations(range(k), r):
            s = list(support)
            w = np.zeros(k)
            w[s] = v[s] - (v[s].sum() - 1.0) / r
            if np.all(w >= -1e-15):
                d = np.sum((w - v) ** 2)
                if d < best_d:
                    best, best_d = np.maximum(w, 0), d
    return best


def central_difference(f, x, h):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def cm_loglik_direct(p, c, n):
    """Decision-count log-likelihood written out term by term."""
    total = 0.0
    for k in range(len(n)):
        if n[k] > 0:
            q = sum(c[k][j] * p[j] for j in range(len(p)))
            total += n[k] * np.log(q)
    return total


def grid_argmax(f, k, step):
    grid = simplex_grid(k, step)
    vals = np.array([f(p) for p in grid])
    i = int(np.argmax(vals))
    return grid[i], vals[i]
