"""Eigenvalue counting, the phase-space integral, the explicit counting
constant for power-law wells, and certified heat-trace tail bounds.

For a single-term well c|x|^rho the counting function obeys

    N(r) ~ C * r^(1/2 + 1/rho),
    C = (c_plus^(-1/rho) + c_minus^(-1/rho)) * (1/rho) * (1/(2 sqrt(pi)))
        * Gamma(1/rho) / Gamma(1/rho + 3/2),

which is the phase-space integral divided by pi.  Note the coefficients
enter with a negative power: a steeper well holds fewer states.  The
constant is evaluated with an internal Lanczos Gamma routine and
cross-validated against direct quadrature in the tests.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .potentials import Potential, PencilPotential
from .quadrature import adaptive_simpson
from . import spectrum as _spectrum

__all__ = [
    "WeylEstimate",
    "EnvelopeViolation",
    "gamma_function",
    "counting_function",
    "phase_space_integral",
    "weyl_constant",
    "tail_bound",
    "make_estimate",
]

# Lanczos approximation, g = 7, 9 coefficients; relative accuracy well below
# 1e-13 on (0, 10], verified in the tests against the libm gamma.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


class EnvelopeViolation(RuntimeError):
    """The assumed counting envelope failed against computed eigenvalues."""


def gamma_function(x: float) -> float:
    """Gamma(x) for real x (poles excluded), Lanczos with reflection below 1/2."""
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma pole at {x}")
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.pi / (math.sin(math.pi * x) * gamma_function(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * math.pow(t, z + 0.5) * math.exp(-t) * acc


@dataclass(frozen=True)
class WeylEstimate:
    """Exact count vs asymptotic count at one energy r."""

    r: float
    count_exact: int
    count_asymptotic: float

    @property
    def ratio(self) -> float:
        return self.count_exact / self.count_asymptotic


def counting_function(spec: "_spectrum.Spectrum", r: float) -> int:
    """#{k : lambda_k < r}; requires the computed spectrum to reach past r."""
    lams = spec.eigenvalues
    if lams[-1] < r:
        raise ValueError(
            f"spectrum reaches only {lams[-1]:.6g} < r={r:.6g}; request more eigenvalues"
        )
    return int(np.searchsorted(lams, r, side="left"))


def _turning_point(p: Potential, t: float, r: float, side: int) -> float:
    """Positive x with t*V(side*x) = r (V strictly increasing on the half-axis)."""
    hi = 1.0
    while t * p(side * hi) < r:
        hi *= 2.0
        if hi > 1e300:
            raise RuntimeError("turning point search diverged")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t * p(side * mid) < r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def phase_space_integral(p: Potential, t: float, r: float) -> float:
    """integral of sqrt(r - t*V(x)) over {x : t*V(x) < r}.

    Adaptive Simpson per half-axis; the square-root vanishing at the turning
    point is removed with the substitution x = x_t - u^2.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if not t > 0:
        raise ValueError("t must be positive")
    total = 0.0
    for side in (1, -1):
        xt = _turning_point(p, t, r, side)
        x_split = 0.75 * xt

        def inner(x, side=side):
            return math.sqrt(max(r - t * p(side * x), 0.0))

        def outer(u, side=side, xt=xt):
            # x = xt - u^2, dx = -2u du; integrand sqrt(r - W) * 2u
            return 2.0 * u * math.sqrt(max(r - t * p(side * (xt - u * u)), 0.0))

        rough = inner(0.0) * x_split + inner(x_split) * (xt - x_split)
        tol = 1e-11 * max(rough, 1e-30)
        total += adaptive_simpson(inner, 0.0, x_split, tol)
        total += adaptive_simpson(outer, 0.0, math.sqrt(xt - x_split), tol)
    return total


def weyl_constant(p: Potential) -> float:
    """Counting-law constant for a single-term well (see module docstring)."""
    if len(p.terms) != 1:
        raise ValueError("the counting constant requires a single homogeneous term")
    term = p.terms[0]
    rho = term.rho
    inv = 1.0 / rho
    coef = math.pow(term.c_plus, -inv) + math.pow(term.c_minus, -inv)
    return coef * inv / (2.0 * math.sqrt(math.pi)) * gamma_function(inv) / gamma_function(inv + 1.5)


def _upper_incomplete_gamma(a: float, x: float) -> float:
    """Gamma(a, x) = integral_x^inf s^(a-1) e^-s ds."""
    return float(gammaincc(a, x)) * gamma_function(a)


def tail_bound(
    p: Potential,
    t: float,
    lambda_floor: float,
    base_eigenvalues: np.ndarray | None = None,
    base_errors: np.ndarray | None = None,
    check_count: int = 32,
) -> float:
    """Certified upper bound for sum of exp(-lambda_n(t)) over lambda_n(t) >= lambda_floor.

    Uses the counting envelope N1(r) <= A * r^q at t=1 with A = 2*C and
    q = 1/2 + 1/rho.  The factor 2 is an empirical certificate: it is checked
    against computed eigenvalue counts over the working range and an
    EnvelopeViolation is raised if the spectrum ever exceeds it.  Integration
    by parts then gives

        tail <= A * s^(-q) * Gamma(q + 1, lambda_floor),   s = t^(2/(2+rho)).
    """
    if len(p.terms) != 1:
        raise ValueError("tail_bound requires a single homogeneous term")
    if not lambda_floor > 0:
        raise ValueError("lambda_floor must be positive")
    if not t > 0:
        raise ValueError("t must be positive")
    term = p.terms[0]
    rho = term.rho
    q = 0.5 + 1.0 / rho
    envelope = 2.0 * weyl_constant(p)
    if base_eigenvalues is None:
        pencil = PencilPotential(v0=None, v1=p)
        base = _spectrum.compute_spectrum_with_budgets(
            pencil, 1.0, check_count, np.full(check_count, 1e-4),
            certify_domain=False,
        )
        mu = base.eigenvalues
        errs = base.error_estimates
    else:
        mu = np.asarray(base_eigenvalues, dtype=float)
        errs = (
            np.zeros_like(mu)
            if base_errors is None
            else np.asarray(base_errors, dtype=float)
        )
    # Just above mu_n the count is n+1; that is where the envelope is tightest.
    # Slack absorbs the eigenvalue solver tolerance on the checked base.
    slack = 1e-9 + 4.0 * errs / np.maximum(mu, 1e-300)
    bound_vals = envelope * np.power(mu, q) * (1.0 + slack)
    counts = np.arange(1, mu.size + 1, dtype=float)
    if np.any(counts > bound_vals):
        worst = int(np.argmax(counts / bound_vals))
        raise EnvelopeViolation(
            f"count envelope {envelope:.6g}*r^{q:.3g} violated at eigenvalue "
            f"{mu[worst]:.6g} (count {worst + 1} > {bound_vals[worst]:.6g})"
        )
    s = math.pow(t, 2.0 / (2.0 + rho))
    return envelope * math.pow(s, -q) * _upper_incomplete_gamma(q + 1.0, lambda_floor)


def make_estimate(spec: "_spectrum.Spectrum", p: Potential, r: float) -> WeylEstimate:
    """Bundle the exact count against the asymptotic law at energy r."""
    term = p.terms[0]
    s = math.pow(spec.t, 2.0 / (2.0 + term.rho))
    # count at parameter t equals the t=1 count at r/s by the scaling law
    asym = weyl_constant(p) * math.pow(r / s, 0.5 + 1.0 / term.rho)
    return WeylEstimate(r=r, count_exact=counting_function(spec, r), count_asymptotic=asym)
