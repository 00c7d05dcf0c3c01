"""Compiled inner loops.

These mirror :mod:`expneuron.map_core` step for step (same branch order, same
operation order) so that compiled and pure-Python iterations agree bitwise.
Errors cannot be raised from ``nogil`` code, so each kernel returns a status
code next to the number of completed steps.
"""

import math

import numpy as np
from numba import njit

from .map_core import EXP_GUARD

OK = 0
OVERFLOW = 1
DOMAIN = 2
ESCAPE = 3

EMPTY = np.empty(0, dtype=np.float64)


@njit(cache=True, nogil=True)
def full_steps(a, s, m, x, y, n, xi_x, xi_y, sig_x, sig_y, out_x, out_y, record):
    """Advance the full map ``n`` steps.

    When ``record`` is true the state after step ``k`` lands in ``out_x[k]``
    (and ``out_y[k]`` if that array is non-empty).  Noise deviates are read
    only when the matching sigma is nonzero.
    """
    keep_y = out_y.shape[0] > 0
    for k in range(n):
        if x < -a:
            if -a > EXP_GUARD:
                return OVERFLOW, k, x, y
            xn = -a * a - math.exp(-a) + y
        elif x < y + 1.0:
            if x > EXP_GUARD:
                return OVERFLOW, k, x, y
            xn = a * x - math.exp(x) + y
        elif x < y + 2.0:
            if y + 1.0 > EXP_GUARD:
                return OVERFLOW, k, x, y
            xn = a * (y + 1.0) - math.exp(y + 1.0) + y
        else:
            xn = -1.0
        yn = y - m * (x + 1.0 - s)
        if sig_x != 0.0:
            xn = xn + sig_x * xi_x[k]
        if sig_y != 0.0:
            yn = yn + sig_y * xi_y[k]
        if not (math.isfinite(xn) and math.isfinite(yn)):
            return OVERFLOW, k, x, y
        x = xn
        y = yn
        if record:
            out_x[k] = x
            if keep_y:
                out_y[k] = y
    return OK, n, x, y


@njit(cache=True, nogil=True)
def shifted_steps(a, s, m, x, y, n, out_x, out_y, record, escape_bound):
    """Advance the shifted reduced map ``n`` steps with domain/escape checks."""
    if s - 1.0 > EXP_GUARD:
        return OVERFLOW, 0, x, y
    e = math.exp(s - 1.0)
    upper = a + (1.0 - a) * s + e
    for k in range(n):
        lhs = s - 1.0 + x
        if not (-a <= lhs and lhs < upper + y):
            return DOMAIN, k, x, y
        if x + s - 1.0 > EXP_GUARD:
            return OVERFLOW, k, x, y
        xn = y + a * x + e - math.exp(x + s - 1.0)
        yn = y - m * x
        x = xn
        y = yn
        if math.hypot(x, y) > escape_bound:
            return ESCAPE, k, x, y
        if record:
            out_x[k] = x
            out_y[k] = y
    return OK, n, x, y
