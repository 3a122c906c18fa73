import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oscitrace import (
    EnvelopeViolation,
    SpectrumRequest,
    compute_spectrum,
    counting_function,
    gamma_function,
    parse_pencil,
    parse_potential,
    phase_space_integral,
    tail_bound,
    weyl_constant,
)

HARMONIC_POT = parse_potential("1:1:2")
QUARTIC_POT = parse_potential("1:1:4")


def test_gamma_against_libm():
    xs = np.concatenate([np.geomspace(0.01, 0.49, 40), np.linspace(0.5, 10.0, 96)])
    for x in xs:
        assert abs(gamma_function(float(x)) - math.gamma(float(x))) <= 1e-13 * math.gamma(
            float(x)
        )


def test_gamma_known_values():
    assert_allclose(gamma_function(0.5), math.sqrt(math.pi), rtol=1e-15)
    assert_allclose(gamma_function(2.0), 1.0, rtol=1e-15)
    assert_allclose(gamma_function(5.0), 24.0, rtol=1e-14)
    with pytest.raises(ValueError):
        gamma_function(0.0)


def test_weyl_constant_harmonic_exact():
    assert abs(weyl_constant(HARMONIC_POT) - 0.5) <= 1e-12


def test_weyl_constant_quartic_frozen():
    # 2 * (1/4) * Gamma(1/4) / (2 sqrt(pi) Gamma(7/4)), evaluated independently
    expected = 0.5 * math.gamma(0.25) / (2.0 * math.sqrt(math.pi) * math.gamma(1.75))
    assert_allclose(weyl_constant(QUARTIC_POT), expected, rtol=1e-13)


def test_weyl_constant_coefficient_scaling():
    # steeper well on one side holds fewer states: coefficients enter with a
    # negative power, so c- = 16, rho = 4 gives (1 + 1/2)/2 of the symmetric value
    skew = parse_potential("1:16:4")
    assert_allclose(weyl_constant(skew), 0.75 * weyl_constant(QUARTIC_POT), rtol=1e-13)
    with pytest.raises(ValueError):
        weyl_constant(parse_potential("1:1:2,1:1:4"))


def test_phase_space_examples():
    assert_allclose(phase_space_integral(HARMONIC_POT, 1.0, 1.0), math.pi / 2, rtol=1e-10)
    assert_allclose(phase_space_integral(HARMONIC_POT, 1.0, 4.0), 2.0 * math.pi, rtol=1e-10)
    assert_allclose(phase_space_integral(QUARTIC_POT, 1.0, 1.0), 1.7480383695, rtol=1e-9)


@pytest.mark.parametrize("pot, rho", [(HARMONIC_POT, 2.0), (QUARTIC_POT, 4.0)])
@pytest.mark.parametrize("r", [1.0, 10.0, 100.0])
def test_phase_space_matches_counting_constant(pot, rho, r):
    # the counting constant is the phase-space integral divided by pi; this
    # cross-validates the Lanczos Gamma routine against pure quadrature
    ps = phase_space_integral(pot, 1.0, r)
    asym = math.pi * weyl_constant(pot) * r ** (0.5 + 1.0 / rho)
    assert abs(ps - asym) <= 1e-9 * asym


def test_phase_space_asymmetric_consistency():
    skew = parse_potential("1:16:4")
    ps = phase_space_integral(skew, 1.0, 50.0)
    asym = math.pi * weyl_constant(skew) * 50.0 ** 0.75
    assert abs(ps - asym) <= 1e-9 * asym


def test_counting_function_strictness():
    # strict inequality: an eigenvalue sitting exactly at r is not counted
    from oscitrace import MeshInfo, Spectrum

    exact = Spectrum(
        t=1.0,
        eigenvalues=np.arange(1.0, 24.0, 2.0),
        error_estimates=np.zeros(12),
        parities=None,
        mesh=MeshInfo(half_width=1.0, grid_points=3, levels=1),
    )
    assert counting_function(exact, 1.0) == 0  # lambda_0 = 1 is not < 1
    assert counting_function(exact, 10.0) == 5
    assert counting_function(exact, 23.0) == 11


def test_counting_function_computed():
    pencil = parse_pencil("none", "1:1:2")
    spec = compute_spectrum(SpectrumRequest(pencil=pencil, t=1.0, count=12, tol=1e-6))
    assert counting_function(spec, 10.0) == 5
    assert counting_function(spec, 0.9) == 0
    assert counting_function(spec, 22.9) == 11
    with pytest.raises(ValueError):
        counting_function(spec, 100.0)


def test_tail_bound_harmonic():
    mu = np.arange(1.0, 80.0, 2.0)
    bound = tail_bound(HARMONIC_POT, 1.0, 41.0, base_eigenvalues=mu)
    true_tail = math.exp(-41.0) / (1.0 - math.exp(-2.0))
    assert true_tail <= bound <= 1e-15


def test_tail_bound_vanishes():
    mu = np.arange(1.0, 80.0, 2.0)
    b1 = tail_bound(HARMONIC_POT, 1.0, 60.0, base_eigenvalues=mu)
    b2 = tail_bound(HARMONIC_POT, 1.0, 300.0, base_eigenvalues=mu)
    assert b2 < b1
    assert tail_bound(HARMONIC_POT, 1.0, 5000.0, base_eigenvalues=mu) == 0.0


def test_tail_bound_quartic():
    bound = tail_bound(QUARTIC_POT, 1.0, 50.0)
    assert 0.0 < bound <= 1e-18


def test_tail_bound_dominates_direct_sum():
    # certified bound must sit above the directly summed remainder
    pencil = parse_pencil("none", "1:1:4")
    spec = compute_spectrum(SpectrumRequest(pencil=pencil, t=1.0, count=24, tol=1e-6))
    mu = spec.eigenvalues
    for cut in (6, 10, 16):
        floor = float(mu[cut - 1]) * (1.0 + 1e-9)
        remainder = float(np.sum(np.exp(-mu[cut:])))
        bound = tail_bound(QUARTIC_POT, 1.0, floor, base_eigenvalues=mu)
        assert bound >= remainder


def test_tail_bound_envelope_violation_for_shallow_well():
    # the factor-2 envelope fails at the spectrum bottom for rho = 1,
    # which the certificate must report rather than paper over
    linear = parse_potential("1:1:1")
    with pytest.raises(EnvelopeViolation):
        tail_bound(linear, 1.0, 30.0)


def test_tail_bound_validation():
    with pytest.raises(ValueError):
        tail_bound(parse_potential("1:1:2,1:1:4"), 1.0, 10.0)
    with pytest.raises(ValueError):
        tail_bound(HARMONIC_POT, 1.0, -3.0)


def test_weyl_ratio_harmonic_moderate():
    pencil = parse_pencil("none", "1:1:2")
    spec = compute_spectrum(SpectrumRequest(pencil=pencil, t=1.0, count=55, tol=0.02))
    n = counting_function(spec, 100.0)
    ratio = n / (0.5 * 100.0)
    assert 0.95 <= ratio <= 1.05
