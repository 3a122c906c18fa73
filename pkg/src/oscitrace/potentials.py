"""Piecewise power-law potentials and one-parameter pencils V0 + t*V1.

A potential here is a finite sum of homogeneous terms

    c_plus * |x|^rho   for x > 0,
    c_minus * |x|^rho  for x < 0,

with strictly positive coefficients and order.  Every such sum is >= 0,
vanishes exactly at the origin, is strictly monotone on each half-axis and
grows without bound, which is what the spectral machinery downstream relies
on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "HomogeneousTerm",
    "Potential",
    "PencilPotential",
    "ConditionReport",
    "evaluate",
    "evaluate_pencil",
    "homogeneity_residual",
    "validate_conditions",
    "parse_potential",
    "parse_pencil",
]


def _abs_power(x, rho: float):
    """|x|^rho with the origin pinned to exactly 0 (works on scalars and arrays)."""
    if np.isscalar(x):
        ax = abs(x)
        return 0.0 if ax == 0.0 else math.pow(ax, rho)
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.power(ax, rho, where=ax > 0.0, out=np.zeros_like(ax))
    return out


@dataclass(frozen=True)
class HomogeneousTerm:
    """One power-law piece c_plus|x|^rho (x>0) / c_minus|x|^rho (x<0)."""

    c_plus: float
    c_minus: float
    rho: float

    def __post_init__(self):
        for name in ("c_plus", "c_minus", "rho"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")

    @property
    def is_even(self) -> bool:
        return self.c_plus == self.c_minus

    def __call__(self, x):
        p = _abs_power(x, self.rho)
        if np.isscalar(x):
            return (self.c_plus if x > 0 else self.c_minus) * p if x != 0 else 0.0
        coef = np.where(np.asarray(x, dtype=float) >= 0.0, self.c_plus, self.c_minus)
        return coef * p


@dataclass(frozen=True)
class Potential:
    """Finite sum of homogeneous terms; nonnegative, zero only at the origin."""

    terms: tuple[HomogeneousTerm, ...]

    def __init__(self, terms: Sequence[HomogeneousTerm]):
        terms = tuple(terms)
        if not terms:
            raise ValueError("a potential needs at least one term")
        object.__setattr__(self, "terms", terms)

    def __call__(self, x):
        total = self.terms[0](x)
        for term in self.terms[1:]:
            total = total + term(x)
        return total

    @property
    def is_even(self) -> bool:
        return all(t.is_even for t in self.terms)

    @property
    def growth_exponent(self) -> float:
        """liminf of ln V / ln|x| at infinity: the dominant (largest) order."""
        return max(t.rho for t in self.terms)

    @property
    def min_order(self) -> float:
        return min(t.rho for t in self.terms)

    def describe(self) -> str:
        return ",".join(f"{t.c_plus:g}:{t.c_minus:g}:{t.rho:g}" for t in self.terms)


@dataclass(frozen=True)
class PencilPotential:
    """The pencil W_t(x) = V0(x) + t*V1(x); v0 may be None meaning V0 == 0."""

    v0: Potential | None
    v1: Potential

    def __post_init__(self):
        if self.v1 is None:
            raise ValueError("v1 must be a nonempty potential")

    @property
    def is_even(self) -> bool:
        # Derived, never user-set: parity splitting downstream must agree
        # with what the coefficients actually say.
        v0_even = self.v0.is_even if self.v0 is not None else True
        return v0_even and self.v1.is_even

    @property
    def is_homogeneous(self) -> bool:
        """True when the pencil is t*V with a single power term (scaling law applies)."""
        return self.v0 is None and len(self.v1.terms) == 1

    def __call__(self, t: float, x):
        if not (t > 0):
            raise ValueError(f"pencil parameter t must be positive, got {t!r}")
        w = t * self.v1(x)
        if self.v0 is not None:
            w = self.v0(x) + w
        return w

    def describe(self) -> str:
        v0 = self.v0.describe() if self.v0 is not None else "none"
        return f"v0={v0};v1={self.v1.describe()}"


def evaluate(p: Potential, x):
    """Evaluate a potential; total function, exactly 0 at the origin."""
    return p(x)


def evaluate_pencil(p: PencilPotential, t: float, x):
    """Evaluate V0(x) + t*V1(x); rejects t <= 0."""
    return p(t, x)


def homogeneity_residual(term: HomogeneousTerm, xi: float, x: float) -> float:
    """Normalized defect of the scaling identity V(xi*x) = xi^rho * V(x).

    For exact arithmetic this is 0; in floating point it stays within a few
    unit roundoffs, which the property tests pin down.
    """
    if not (xi > 0):
        raise ValueError("xi must be positive")
    left = term(xi * x)
    right = math.pow(xi, term.rho) * term(x)
    return abs(left - right) / max(1.0, abs(right))


@dataclass(frozen=True)
class ConditionReport:
    """Structural checks for a pencil: positivity, unboundedness, log-growth."""

    positivity_ok: bool
    unboundedness_ok: bool
    growth_exponent: float
    growth_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.positivity_ok and self.unboundedness_ok and self.growth_ok


def validate_conditions(p: PencilPotential) -> ConditionReport:
    """Report (never raise) whether the pencil satisfies the structural conditions.

    Positivity and unboundedness are analytic consequences of positive
    coefficients; the growth exponent is the dominant power order, which must
    be > 0 for the heat trace to be finite for every t.
    """
    pots = [p.v1] + ([p.v0] if p.v0 is not None else [])
    positivity = all(t.c_plus > 0 and t.c_minus > 0 for pot in pots for t in pot.terms)
    growth = max(pot.growth_exponent for pot in pots)
    unbounded = positivity and growth > 0
    return ConditionReport(
        positivity_ok=positivity,
        unboundedness_ok=unbounded,
        growth_exponent=growth,
        growth_ok=growth > 0,
    )


def parse_potential(text: str) -> Potential:
    """Parse the CLI literal: comma-separated terms ``c+:c-:rho``.

    Example: ``1:1:2`` is x^2; ``1:16:4,1:1:2`` is x^4 + x^2 for x>0 and
    16x^4 + x^2 for x<0.
    """
    terms = []
    for chunk in text.split(","):
        parts = chunk.strip().split(":")
        if len(parts) != 3:
            raise ValueError(f"bad potential term {chunk!r}; expected c+:c-:rho")
        try:
            cp, cm, rho = (float(s) for s in parts)
        except ValueError as exc:
            raise ValueError(f"bad potential term {chunk!r}: {exc}") from None
        terms.append(HomogeneousTerm(cp, cm, rho))
    return Potential(terms)


def parse_pencil(v0_text: str, v1_text: str) -> PencilPotential:
    """Parse ``--v0/--v1`` literals; ``--v0 none`` selects the t*V family."""
    v0 = None if v0_text.strip().lower() in ("none", "0", "") else parse_potential(v0_text)
    return PencilPotential(v0=v0, v1=parse_potential(v1_text))
