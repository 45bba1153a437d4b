"""Adaptive Simpson quadrature used by the weight-integral machinery.

Integrands here are smooth away from 0; improper pieces are handled by
the callers through substitutions, so a plain bisection scheme with the
15x Richardson update is enough.
"""

from __future__ import annotations

import math


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-12, max_depth: int = 52) -> float:
    """Integral of scalar f over [a, b] to absolute tolerance roughly tol."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("adaptive_simpson requires finite endpoints")
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    stack = [(a, fa, b, fb, m, fm, whole, tol, 0)]
    while stack:
        a0, fa0, b0, fb0, m0, fm0, s0, tol0, depth = stack.pop()
        lm = 0.5 * (a0 + m0)
        rm = 0.5 * (m0 + b0)
        flm, frm = f(lm), f(rm)
        sl = (m0 - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        sr = (b0 - m0) / 6.0 * (fm0 + 4.0 * frm + fb0)
        err = sl + sr - s0
        if depth >= max_depth or abs(err) <= 15.0 * tol0:
            total += sl + sr + err / 15.0
        else:
            stack.append((a0, fa0, m0, fm0, lm, flm, sl, tol0 / 2.0, depth + 1))
            stack.append((m0, fm0, b0, fb0, rm, frm, sr, tol0 / 2.0, depth + 1))
    return total


def exp_power_tail_integral(b: float, q: float, tol: float = 1e-12) -> float:
    """Integral of exp(-z^q) over [b, inf) for q > 0, b >= 0.

    The tail past z = max(b, 1) is mapped through x = z^q, which removes
    the stretched-exponential scale; the remaining integrands are smooth.
    """
    if q <= 0:
        raise ValueError("q must be positive")
    if b < 0:
        b = 0.0
    total = 0.0
    knee = 1.0
    if b < knee:
        total += adaptive_simpson(lambda z: math.exp(-(z**q)), b, knee, tol=tol)
        z0 = knee
    else:
        z0 = b
    x0 = z0**q
    x1 = x0 + 60.0 * (1.0 + 1.0 / q)
    inv_q = 1.0 / q

    def g(x):
        return inv_q * x ** (inv_q - 1.0) * math.exp(-x)

    total += adaptive_simpson(g, x0, x1, tol=tol)
    return total
