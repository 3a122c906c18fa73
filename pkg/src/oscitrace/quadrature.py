"""Small quadrature helpers: adaptive Simpson and compensated summation."""
from __future__ import annotations

__all__ = ["QuadratureError", "adaptive_simpson", "kahan_sum"]


class QuadratureError(RuntimeError):
    """Raised when the requested quadrature tolerance cannot be met."""


def _simpson(fa, fb, fm, a, b):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(
    f, a: float, b: float, tol: float, max_depth: int = 50, noise: float = 0.0
) -> float:
    """Integral of f over [a, b] to absolute tolerance ~tol.

    Classic recursive Simpson with the 1/15 Richardson error control.
    ``noise`` declares the evaluation noise of f per unit length: intervals
    whose residual is below tol + noise*(b-a) are accepted, since refining
    past the integrand's own accuracy cannot help.  Raises QuadratureError if
    the depth budget is exhausted before the error bound is met.
    """
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = _simpson(fa, fb, fm, a, b)
    return _adaptive(f, a, fa, b, fb, m, fm, whole, tol, max_depth, noise)


def _adaptive(f, a, fa, b, fb, m, fm, whole, tol, depth, noise):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = _simpson(fa, fm, flm, a, m)
    right = _simpson(fm, fb, frm, m, b)
    err = left + right - whole
    if abs(err) <= 15.0 * (tol + noise * (b - a)):
        return left + right + err / 15.0
    # an interval at floating-point resolution cannot be refined further;
    # accept the corrected estimate (evaluation noise dominates below this)
    if b - a <= 1e-13 * (abs(a) + abs(b) + 1e-30):
        return left + right + err / 15.0
    if depth <= 0:
        raise QuadratureError(
            f"adaptive Simpson ran out of depth on [{a:g},{b:g}] (residual {abs(err)/15:.2e} > {tol:.2e})"
        )
    half = 0.5 * tol
    return _adaptive(f, a, fa, m, fm, lm, flm, left, half, depth - 1, noise) + _adaptive(
        f, m, fm, b, fb, rm, frm, right, half, depth - 1, noise
    )


def kahan_sum(values) -> float:
    """Compensated summation; keeps cancellation error near one roundoff."""
    total = 0.0
    comp = 0.0
    for v in values:
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total
