"""Overflow-safe arithmetic on quantities stored as natural logarithms.

All abscissae and plateau values in this package are kept in log
coordinates so that boundaries like exp(k + e^k) never have to be
materialised.  Sums of exponentials are evaluated with max-factoring.
"""

from __future__ import annotations

import math

import numpy as np

NEG_INF = float("-inf")


def log_add(la: float, lb: float) -> float:
    """log(e^la + e^lb) without overflow."""
    if la == NEG_INF:
        return lb
    if lb == NEG_INF:
        return la
    hi, lo = (la, lb) if la >= lb else (lb, la)
    return hi + math.log1p(math.exp(lo - hi))


def log_diff(la: float, lb: float) -> float:
    """log(e^la - e^lb) for la >= lb; -inf when they are equal."""
    if lb == NEG_INF:
        return la
    if la < lb:
        raise ValueError("log_diff requires la >= lb")
    d = lb - la
    if d >= 0.0:
        return NEG_INF
    return la + math.log1p(-math.exp(d))


def logsumexp(log_terms) -> float:
    """log(sum(exp(t))) over a 1-d array, ignoring -inf entries."""
    arr = np.asarray(log_terms, dtype=float)
    if arr.size == 0:
        return NEG_INF
    m = np.max(arr)
    if m == NEG_INF:
        return NEG_INF
    return float(m + np.log(np.sum(np.exp(arr - m))))


def log1p_exp(u):
    """log(1 + e^u), elementwise and safe for u of either sign."""
    u = np.asarray(u, dtype=float)
    out = np.where(u > 0.0, u + np.log1p(np.exp(-np.abs(u))), np.log1p(np.exp(np.minimum(u, 0.0))))
    if out.ndim == 0:
        return float(out)
    return out
