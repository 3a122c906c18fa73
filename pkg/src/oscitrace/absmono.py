"""Positivity testing by n-th order differences, with rounding-aware tolerances.

A function f is absolutely monotone on an interval when every forward
difference

    D_h^n f(t) = sum_k (-1)^(n-k) C(n,k) f(t + k h)

is nonnegative there; completely monotone on (0, inf) when the sign-flipped
differences (-1)^n D_h^n f are.  In floating point an alternating binomial
sum of magnitude-S values carries rounding noise of order u * S, so every
tested difference comes with the bound

    eps(n, t, h) = 8 u * sum_k C(n,k) |f(t + k h)|   (u = 2^-53)

plus, when the evaluator declares its own accuracy, the amplified evaluation
error sum_k C(n,k) err(t + k h).  A difference is only ever reported as a
violation relative to that tolerance; orders above 12 are refused outright
because 2^n growth makes them vacuous in double precision.

The module also carries the machinery for the derivative route: the
positive-coefficient polynomials P_k with (exp Psi)^(k) = exp(Psi) * P_k(
Psi', ..., Psi^(k)), and the closed-form derivatives of the power laws
Psi(t) = -a(-t)^alpha on the negative half-axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "SampledFunction",
    "CMReport",
    "nth_difference",
    "am_test",
    "bell_recursion",
    "exp_derivatives",
    "power_law_derivatives",
    "UNIT_ROUNDOFF",
    "ROUNDING_KAPPA",
    "ORDER_HARD_MAX",
]

UNIT_ROUNDOFF = 2.0 ** -53
ROUNDING_KAPPA = 8.0
ORDER_HARD_MAX = 12
DEFAULT_H_FACTORS = (1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0)


@dataclass(frozen=True)
class SampledFunction:
    """Evaluator with a domain and an optional pointwise accuracy bound."""

    f: Callable[[float], float]
    domain: tuple[float, float]
    err: Callable[[float], float] | None = None

    @classmethod
    def from_table(cls, ts, values) -> "SampledFunction":
        """Exact-lookup evaluator over a uniformly spaced (t, value) table."""
        ts = np.asarray(ts, dtype=float)
        values = np.asarray(values, dtype=float)
        if ts.ndim != 1 or ts.size < 2 or values.shape != ts.shape:
            raise ValueError("need matching 1-d arrays with at least two rows")
        steps = np.diff(ts)
        dt = float(steps[0])
        if dt <= 0 or np.any(np.abs(steps - dt) > 1e-9 * abs(dt)):
            raise ValueError("table grid must be uniformly spaced and ascending")
        t0 = float(ts[0])
        span = float(ts[-1] - ts[0])

        def lookup(t: float) -> float:
            i = round((t - t0) / dt)
            if not 0 <= i < ts.size or abs(t - (t0 + i * dt)) > 1e-8 * max(dt, abs(t)):
                raise ValueError(f"evaluation point {t!r} is off the table grid")
            return float(values[i])

        pad = 1e-9 * max(span, abs(dt))
        return cls(f=lookup, domain=(t0 - pad, float(ts[-1]) + pad))

    def contains(self, x: float) -> bool:
        a, b = self.domain
        return a < x < b or math.isclose(x, a) or math.isclose(x, b)


@dataclass(frozen=True)
class CMReport:
    """Outcome of a difference-positivity sweep over (order, t, h)."""

    verdict: str  # pass | inconclusive | fail
    max_normalized_violation: float
    worst_case: tuple[int, float, float] | None  # (order, t, h)
    orders_tested: int
    mode: str
    grid: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def nth_difference(
    f: SampledFunction, t: float, h: float, n: int
) -> tuple[float, float]:
    """(D_h^n f(t), rounding bound 8u * sum C(n,k)|f|); nodes must lie in the domain."""
    if not h > 0:
        raise ValueError("h must be positive")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not (f.contains(t) and f.contains(t + n * h)):
        raise ValueError(
            f"difference stencil [{t}, {t + n * h}] leaves the domain {f.domain}"
        )
    value = 0.0
    abs_sum = 0.0
    for k in range(n + 1):
        c = math.comb(n, k)
        fk = float(f.f(t + k * h))
        abs_sum += c * abs(fk)
        value += c * fk if (n - k) % 2 == 0 else -c * fk
    return value, ROUNDING_KAPPA * UNIT_ROUNDOFF * abs_sum


def am_test(
    f: SampledFunction,
    orders: int,
    t_grid: Sequence[float],
    h_set: Sequence[float] | None = None,
    mode: str = "am",
    h_factors: Sequence[float] = DEFAULT_H_FACTORS,
) -> CMReport:
    """Sweep differences of all orders <= ``orders`` over the (t, h) matrix.

    mode "am" checks D_h^n f >= -eps; mode "cm" checks (-1)^n D_h^n f >= -eps.
    h defaults to scale-aware steps {|t|/16, |t|/8, |t|/4}; combinations whose
    stencil leaves the domain are skipped.  A violation within 10x of the
    rounding tolerance yields "inconclusive" rather than "fail".
    """
    if mode not in ("am", "cm"):
        raise ValueError("mode must be 'am' or 'cm'")
    if not 1 <= orders <= ORDER_HARD_MAX:
        raise ValueError(f"orders must be in [1, {ORDER_HARD_MAX}]")
    ts = [float(t) for t in t_grid]
    if not ts:
        raise ValueError("empty t grid")

    memo: dict[float, float] = {}
    err_memo: dict[float, float] = {}

    def fval(x: float) -> float:
        v = memo.get(x)
        if v is None:
            v = float(f.f(x))
            memo[x] = v
        return v

    def ferr(x: float) -> float:
        v = err_memo.get(x)
        if v is None:
            v = float(f.err(x))
            err_memo[x] = v
        return v

    worst = 0.0
    worst_case: tuple[int, float, float] | None = None
    for t in ts:
        hs = list(h_set) if h_set is not None else [abs(t) * fac for fac in h_factors]
        for h in hs:
            if h <= 0:
                raise ValueError("steps must be positive")
            for n in range(orders + 1):
                if not (f.contains(t) and f.contains(t + n * h)):
                    break
                value = 0.0
                abs_sum = 0.0
                err_sum = 0.0
                for k in range(n + 1):
                    c = math.comb(n, k)
                    fk = fval(t + k * h)
                    abs_sum += c * abs(fk)
                    value += c * fk if (n - k) % 2 == 0 else -c * fk
                    if f.err is not None:
                        err_sum += c * ferr(t + k * h)
                eps = ROUNDING_KAPPA * UNIT_ROUNDOFF * abs_sum + err_sum
                signed = value if mode == "am" else (value if n % 2 == 0 else -value)
                if signed < 0.0:
                    normalized = -signed / max(eps, 5e-324)
                    if normalized > worst:
                        worst = normalized
                        worst_case = (n, t, h)
    if worst <= 1.0:
        verdict = "pass"
    elif worst <= 10.0:
        verdict = "inconclusive"
    else:
        verdict = "fail"
    grid = f"{len(ts)} points in [{min(ts):g}, {max(ts):g}]"
    return CMReport(
        verdict=verdict,
        max_normalized_violation=worst,
        worst_case=worst_case,
        orders_tested=orders,
        mode=mode,
        grid=grid,
    )


@lru_cache(maxsize=64)
def _bell_dict(k: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """P_k as a mapping exponent-multi-index -> positive integer coefficient.

    P_1 = y1 and P_{k+1} = y1 P_k + sum_j dP_k/dy_j * y_{j+1}; exponent tuples
    have length k.
    """
    if k == 1:
        return (((1,), 1),)
    prev = _bell_dict(k - 1)
    out: dict[tuple[int, ...], int] = {}
    for exps, coef in prev:
        # y1 * P_k
        bumped = (exps[0] + 1,) + exps[1:] + (0,)
        out[bumped] = out.get(bumped, 0) + coef
        # sum_j dP/dy_j * y_{j+1}
        for j, e in enumerate(exps):
            if e == 0:
                continue
            lowered = list(exps) + [0]
            lowered[j] -= 1
            lowered[j + 1] += 1
            key = tuple(lowered)
            out[key] = out.get(key, 0) + coef * e
    return tuple(sorted(out.items(), key=lambda kv: tuple(-e for e in kv[0])))


def bell_recursion(k: int) -> list[tuple[int, tuple[int, ...]]]:
    """P_k as a list of (coefficient, exponents over y_1..y_k), all coefficients positive."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return [(coef, exps) for exps, coef in _bell_dict(k)]


def exp_derivatives(inner_derivs: Sequence[float], base_value: float) -> list[float]:
    """Derivatives of Phi = base * exp-composition given the inner derivatives.

    Returns [Phi^(1), ..., Phi^(k)] with Phi^(j) = base_value * P_j(y_1..y_j)
    where y_j are the supplied inner derivative values.  Nonnegative inputs
    therefore yield nonnegative outputs, coefficient positivity doing the work.
    """
    if not base_value > 0:
        raise ValueError("base_value must be positive")
    ys = [float(v) for v in inner_derivs]
    out = []
    for j in range(1, len(ys) + 1):
        total = 0.0
        for coef, exps in bell_recursion(j):
            prod = float(coef)
            for y, e in zip(ys, exps):
                if e:
                    prod *= y ** e
            total += prod
        out.append(base_value * total)
    return out


def power_law_derivatives(a: float, alpha: float, t: float, k_max: int) -> list[float]:
    """Derivatives of Psi(t) = -a(-t)^alpha for t < 0, all strictly positive.

    Psi^(k)(t) = (-1)^(k-1) a * alpha(alpha-1)...(alpha-k+1) * (-t)^(alpha-k);
    for 0 < alpha < 1 every entry is positive, which is what makes exp(Psi)
    absolutely monotone on the negative half-axis.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not t < 0:
        raise ValueError("t must be negative")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    out = []
    coef = alpha  # (-1)^(k-1) alpha(alpha-1)...(alpha-k+1), kept positive by recurrence
    for k in range(1, k_max + 1):
        out.append(a * coef * math.pow(-t, alpha - k))
        coef *= (k - alpha)
    return out
