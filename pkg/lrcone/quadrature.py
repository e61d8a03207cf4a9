"""
Adaptive Simpson quadrature for smooth, possibly vector-valued integrands.

A vector integrand is integrated componentwise on a shared subdivision; the
error estimate of a panel is the largest componentwise estimate.
"""
from typing import Callable

import numpy as np

from lrcone.errors import NumericFailureError

# --- Configuration ---
CONFIG = {
    "DEFAULT_TOL": 1e-6,
    "MAX_DEPTH": 50,
}
# --- End Configuration ---


def _simpson(fa, fm, fb, h: float):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def integrate_adaptive_simpson(f: Callable[[float], np.ndarray | float], a: float, b: float,
                               tol: float = CONFIG["DEFAULT_TOL"],
                               max_depth: int = CONFIG["MAX_DEPTH"]) -> tuple[np.ndarray | float, float]:
    """
    Integrates f over [a, b] to absolute tolerance `tol`.

    Returns:
        (integral, error_estimate). The integral has the shape of f's values.

    Raises:
        NumericFailureError: a panel still misses its tolerance at `max_depth`.
    """
    if a == b:
        zero = np.zeros_like(np.asarray(f(a), dtype=float))
        return (float(zero) if zero.ndim == 0 else zero), 0.0
    if a > b:
        value, error = integrate_adaptive_simpson(f, b, a, tol, max_depth)
        return -value, error

    def _adaptive(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2.0
        lm, rm = (a + m) / 2.0, (m + b) / 2.0
        flm = np.asarray(f(lm), dtype=float)
        frm = np.asarray(f(rm), dtype=float)
        left = _simpson(fa, flm, fm, m - a)
        right = _simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        error = float(np.max(np.abs(delta))) / 15.0
        if error <= tol:
            # Richardson extrapolation
            return left + right + delta / 15.0, error
        if depth >= max_depth:
            raise NumericFailureError("Adaptive Simpson quadrature did not converge", {
                "interval": (a, b),
                "error_estimate": error,
                "tolerance": tol,
                "max_depth": max_depth,
            })
        lv, le = _adaptive(a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
        rv, re = _adaptive(m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
        return lv + rv, le + re

    fa = np.asarray(f(a), dtype=float)
    fb = np.asarray(f(b), dtype=float)
    m = (a + b) / 2.0
    fm = np.asarray(f(m), dtype=float)
    whole = _simpson(fa, fm, fb, b - a)
    value, error = _adaptive(a, b, fa, fm, fb, whole, tol, 0)
    if value.ndim == 0:
        return float(value), error
    return value, error
