"""Independent finite-difference oracles.

The package differentiates with nested duals; these helpers differentiate the
same callables with central differences so tests can cross-check the two
routes.  Step size 1e-5 balances truncation against roundoff for first
derivatives of O(1) quantities.
"""

import numpy as np

H = 1e-5


def fd_directional(f, p, v, h=H):
    """Central-difference directional derivative of f (scalar or tuple output)."""
    pp = tuple(pi + h * vi for pi, vi in zip(p, v))
    pm = tuple(pi - h * vi for pi, vi in zip(p, v))
    fp, fm = f(pp), f(pm)
    if isinstance(fp, (tuple, list)):
        return tuple((a - b) / (2.0 * h) for a, b in zip(fp, fm))
    return (fp - fm) / (2.0 * h)


def fd_partial(f, p, i, h=H):
    v = tuple(1.0 if j == i else 0.0 for j in range(len(p)))
    return fd_directional(f, p, v, h)


def fd_second(f, p, i, j, h=1e-4):
    """Mixed second partial d_i d_j f by nested central differences."""
    def di(q):
        return fd_partial(f, q, i, h)
    return fd_partial(di, p, j, h)


def max_abs_diff(a, b):
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))
