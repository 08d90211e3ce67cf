"""Adaptive Simpson quadrature for scalar- or vector-valued integrands.

Known non-smooth points (schedule jumps, spline knots) are registered as
mandatory interval boundaries so the adaptive refinement only ever sees
smooth pieces.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureError

__all__ = ["adaptive_simpson"]

_DEFAULT_TOL = 1e-10
_MAX_INTERVALS = 2 ** 20


def adaptive_simpson(f, a: float, b: float, *, tol: float = _DEFAULT_TOL,
                     breakpoints=(), max_intervals: int = _MAX_INTERVALS):
    """Integrate f over [a, b] to componentwise absolute tolerance tol.

    Args:
        f: callable t -> float or 1-D array; the output shape must not vary.
        breakpoints: points forced to be interval boundaries.
        max_intervals: bisection budget; exhausting it raises QuadratureError
            carrying the offending interval and worst component index.
    """
    if b < a:
        raise ValueError(f"empty interval [{a}, {b}]")
    fa = np.asarray(f(a), dtype=float)
    if a == b:
        return np.zeros_like(fa) if fa.ndim else 0.0
    inner = sorted({float(p) for p in breakpoints if a < p < b})
    bounds = [a, *inner, b]
    span = b - a
    total = np.zeros_like(np.atleast_1d(fa))
    budget = [int(max_intervals)]
    left_val = fa
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        piece_tol = max(tol * (hi - lo) / span, 1e-300)
        right_val = np.asarray(f(hi), dtype=float)
        total = total + _adaptive_piece(f, lo, np.atleast_1d(left_val),
                                        hi, np.atleast_1d(right_val),
                                        piece_tol, budget)
        left_val = right_val
    return total if fa.ndim else float(total[0])


def _simpson(h, fa, fm, fb):
    return (h / 6.0) * (fa + 4.0 * fm + fb)


def _adaptive_piece(f, a, fa, b, fb, tol, budget, min_depth=3):
    m = 0.5 * (a + b)
    fm = np.atleast_1d(np.asarray(f(m), dtype=float))
    total = np.zeros_like(fa)
    stack = [(a, fa, m, fm, b, fb, _simpson(b - a, fa, fm, fb), tol, 0)]
    while stack:
        a0, f0, m0, fm0, b0, f1, whole, tol0, depth = stack.pop()
        budget[0] -= 1
        if budget[0] < 0:
            worst = int(np.argmax(np.abs(whole)))
            raise QuadratureError(
                f"quadrature budget exhausted on [{a0}, {b0}]",
                interval=(a0, b0), component=worst)
        lm = 0.5 * (a0 + m0)
        rm = 0.5 * (m0 + b0)
        flm = np.atleast_1d(np.asarray(f(lm), dtype=float))
        frm = np.atleast_1d(np.asarray(f(rm), dtype=float))
        left = _simpson(m0 - a0, f0, flm, fm0)
        right = _simpson(b0 - m0, fm0, frm, f1)
        delta = left + right - whole
        converged = np.max(np.abs(delta)) <= 15.0 * tol0 and depth >= min_depth
        # Width floor: nothing left to resolve below ~machine spacing.
        if converged or (b0 - a0) <= 1e-14 * (1 + abs(a0)):
            total = total + left + right + delta / 15.0
        else:
            half = 0.5 * tol0
            stack.append((a0, f0, lm, flm, m0, fm0, left, half, depth + 1))
            stack.append((m0, fm0, rm, frm, b0, f1, right, half, depth + 1))
    return total
