"""Quadrature helpers shared by the analytic formulas.

Thin wrappers around QUADPACK with error checking, plus the reciprocal
power-tail integral that all power-law interference reductions share.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special


class QuadratureError(RuntimeError):
    """Quadrature failed to converge; carries partial diagnostics."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


def quad_checked(f, a, b, *, points=None, rtol=1e-10, atol=1e-12, limit=200):
    """scipy.integrate.quad with a hard error-estimate check.

    points (interior breakpoints) only apply to finite intervals; for
    infinite intervals the domain is split at them instead.
    """
    pts = sorted(p for p in (points or []) if a < p < (b if b != np.inf else math.inf))
    if b == np.inf and pts:
        total, err = 0.0, 0.0
        lo = a
        for p in pts:
            v, e = quad_checked(f, lo, p, rtol=rtol, atol=atol, limit=limit)
            total, err, lo = total + v, err + e, p
        v, e = quad_checked(f, lo, np.inf, rtol=rtol, atol=atol, limit=limit)
        return total + v, err + e
    val, err = integrate.quad(f, a, b, points=pts or None, limit=limit,
                              epsabs=atol, epsrel=rtol)
    if not math.isfinite(val) or err > max(atol, 10 * rtol * abs(val) + atol) * 1e3:
        raise QuadratureError(
            f"integral on [{a}, {b}] did not converge (value {val}, "
            f"error estimate {err})", value=val, error=err)
    return val, err


def reciprocal_power_tail(x0, b):
    """int_{x0}^inf du / (1 + u**b) for b > 1, x0 >= 0.

    Closed form through the regularized incomplete beta function; equals
    (pi/b)/sin(pi/b) at x0 = 0.
    """
    if b <= 1:
        raise ValueError("need b > 1 for an integrable tail")
    x0 = float(x0)
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    t0 = 1.0 / (1.0 + x0**b) if x0 > 0 else 1.0
    a_, b_ = 1.0 - 1.0 / b, 1.0 / b
    return (special.betainc(a_, b_, t0) * special.beta(a_, b_)) / b


def growing_partial_integrals(f, *, start=1.0, doublings=24, rtol=1e-9):
    """Partial integrals of f over [0, start*2**k]; used to probe divergence.

    Returns (diverging, partials).  Divergence is declared after three
    consecutive doublings whose partial integral grows by more than x1.5.
    """
    partials = []
    total, lo = 0.0, 0.0
    streak = 0
    for k in range(doublings):
        hi = start * 2.0**k
        part, _ = integrate.quad(f, lo, hi, limit=200, epsrel=rtol)
        total += part
        partials.append(total)
        if len(partials) >= 2 and partials[-2] > 0:
            streak = streak + 1 if total > 1.5 * partials[-2] else 0
            if streak >= 3:
                return True, partials
        if len(partials) >= 2 and partials[-2] > 0 and \
                abs(total - partials[-2]) <= rtol * abs(total):
            return False, partials
        lo = hi
    return False, partials
