import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oscitrace import (
    ConvergenceError,
    SpectrumRequest,
    choose_domain,
    compute_spectrum,
    discretize,
    parity_labels,
    parse_pencil,
    scaled_spectrum,
)

from oracle_shooting import refine_eigenvalue

HARMONIC = parse_pencil("none", "1:1:2")
QUARTIC = parse_pencil("none", "1:1:4")
ANHARMONIC = parse_pencil("1:1:2", "1:1:4")

# frozen shooting-oracle values (RK45 rtol 1e-12, bisection to 1e-12);
# regenerated live for the ground states in test_shooting_oracle_agreement
QUARTIC_EIGS = (1.0603620905, 3.7996730298, 7.4556979380)
ANHARMONIC_EIGS = (1.3923516415, 4.6488127042, 8.6550499578, 13.1568038980)


def test_discretize_hand_values():
    T = discretize(HARMONIC, 1.0, 1.0, 3)
    assert_allclose(T.diag, [8.25, 8.0, 8.25], rtol=1e-14)
    assert_allclose(T.offdiag, [-4.0, -4.0], rtol=1e-14)
    Tq = discretize(QUARTIC, 1.0, 1.0, 3)
    assert_allclose(Tq.diag, [8.0625, 8.0, 8.0625], rtol=1e-14)


def test_discretize_validation():
    with pytest.raises(ValueError):
        discretize(HARMONIC, 1.0, -1.0, 8)
    with pytest.raises(ValueError):
        discretize(HARMONIC, 1.0, 1.0, 2)


def smallest_domain_scan(pencil, t, lam_guess):
    """Brute-force oracle for the domain rule: scan X in small steps."""

    def turning(side):
        lo, hi = 0.0, 1.0
        while pencil(t, side * hi) < lam_guess:
            hi *= 2
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if pencil(t, side * mid) < lam_guess:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    best = 0.0
    for side in (1, -1):
        xtp = turning(side)
        x = xtp
        while True:
            x += 1e-3
            w = pencil(t, side * x)
            if w >= 4 * lam_guess and (x - xtp) * math.sqrt(max(w - lam_guess, 0.0)) >= 30.0:
                break
        best = max(best, x)
    return best


def test_choose_domain_harmonic_example():
    X = choose_domain(HARMONIC, 1.0, 10, 21.0)
    # binding condition is W(X) >= 4 * lambda_guess here
    assert_allclose(X, math.sqrt(84.0), rtol=1e-6)
    assert_allclose(X, smallest_domain_scan(HARMONIC, 1.0, 21.0), atol=2e-3)


def test_choose_domain_quartic_oracle():
    X = choose_domain(QUARTIC, 1.0, 3, 10.0)
    assert_allclose(X, smallest_domain_scan(QUARTIC, 1.0, 10.0), atol=2e-3)


def test_choose_domain_shrinks_with_t():
    lam1 = 21.0
    lam100 = math.sqrt(100.0) * lam1  # scaling law for the harmonic family
    assert choose_domain(HARMONIC, 100.0, 10, lam100) < choose_domain(
        HARMONIC, 1.0, 10, lam1
    )


def test_choose_domain_asymmetric_takes_larger_side():
    skew = parse_pencil("none", "1:16:2")
    x = choose_domain(skew, 1.0, 4, 10.0)
    sym_heavy = choose_domain(parse_pencil("none", "1:1:2"), 1.0, 4, 10.0)
    sym_light = choose_domain(parse_pencil("none", "16:16:2"), 1.0, 4, 10.0)
    assert sym_light < x <= sym_heavy * (1 + 1e-9)


def test_harmonic_spectrum():
    spec = compute_spectrum(SpectrumRequest(pencil=HARMONIC, t=1.0, count=10, tol=1e-6))
    assert_allclose(spec.eigenvalues, np.arange(1.0, 20.0, 2.0), atol=1e-6)
    assert np.all(spec.error_estimates <= 1e-6)
    assert spec.parities == ("even", "odd") * 5
    assert np.all(np.diff(spec.eigenvalues) > 0)
    assert np.all(spec.eigenvalues > 0)


def test_quartic_ground_states_match_frozen_oracle():
    spec = compute_spectrum(SpectrumRequest(pencil=QUARTIC, t=1.0, count=3, tol=1e-7))
    assert_allclose(spec.eigenvalues, QUARTIC_EIGS, atol=2e-7)
    spec2 = compute_spectrum(SpectrumRequest(pencil=ANHARMONIC, t=1.0, count=4, tol=1e-5))
    assert_allclose(spec2.eigenvalues, ANHARMONIC_EIGS, atol=1e-5)


def test_shooting_oracle_agreement():
    # live oracle run (independent RK45 shooting), bracketed near the known values
    lam_quartic = refine_eigenvalue(lambda x: x**4, (0.8, 1.3), 0, X=4.2)
    assert_allclose(lam_quartic, QUARTIC_EIGS[0], atol=1e-9)
    lam_anh = refine_eigenvalue(lambda x: x * x + x**4, (1.2, 1.6), 0, X=4.0)
    assert_allclose(lam_anh, ANHARMONIC_EIGS[0], atol=1e-9)
    spec = compute_spectrum(SpectrumRequest(pencil=QUARTIC, t=1.0, count=1, tol=1e-6))
    assert_allclose(spec.eigenvalues[0], lam_quartic, atol=1e-6)


@pytest.mark.parametrize("rho, potential", [(1.0, "1:1:1"), (2.0, "1:1:2"), (4.0, "1:1:4")])
def test_scaling_law_against_direct(rho, potential):
    pencil = parse_pencil("none", potential)
    base = compute_spectrum(SpectrumRequest(pencil=pencil, t=1.0, count=4, tol=1e-7))
    for t in (0.5, 2.0):
        direct = compute_spectrum(SpectrumRequest(pencil=pencil, t=t, count=4, tol=1e-7))
        scaled = scaled_spectrum(base, t, rho)
        rel = np.max(np.abs(direct.eigenvalues - scaled.eigenvalues) / scaled.eigenvalues)
        assert rel <= 1e-6


def test_scaled_spectrum_examples():
    base = compute_spectrum(SpectrumRequest(pencil=HARMONIC, t=1.0, count=3, tol=1e-8))
    scaled = scaled_spectrum(base, 4.0, 2.0)
    assert_allclose(scaled.eigenvalues, [2.0, 6.0, 10.0], atol=1e-6)
    same = scaled_spectrum(base, 1.0, 2.0)
    assert_allclose(same.eigenvalues, base.eigenvalues, rtol=0, atol=0)
    qbase = compute_spectrum(SpectrumRequest(pencil=QUARTIC, t=1.0, count=1, tol=1e-7))
    s8 = scaled_spectrum(qbase, 8.0, 4.0)
    assert_allclose(s8.eigenvalues[0], 2.0 * QUARTIC_EIGS[0], atol=1e-5)


def test_scaled_spectrum_rejects_pencils():
    base = compute_spectrum(SpectrumRequest(pencil=ANHARMONIC, t=1.0, count=2, tol=1e-5))
    with pytest.raises(ValueError):
        scaled_spectrum(base, 2.0, 4.0)
    hbase = compute_spectrum(SpectrumRequest(pencil=HARMONIC, t=1.0, count=2, tol=1e-6))
    with pytest.raises(ValueError):
        scaled_spectrum(hbase, 2.0, 4.0)  # wrong order


def test_parity_labels():
    assert parity_labels(HARMONIC, 4) == ("even", "odd", "even", "odd")
    assert parity_labels(HARMONIC, 1) == ("even",)
    with pytest.raises(ValueError):
        parity_labels(parse_pencil("none", "1:2:2"), 3)


def test_asymmetric_spectrum_has_no_parities():
    skew = parse_pencil("none", "1:16:2")
    spec = compute_spectrum(SpectrumRequest(pencil=skew, t=1.0, count=3, tol=1e-6))
    assert spec.parities is None
    assert np.all(np.diff(spec.eigenvalues) > 0)


def test_second_order_convergence_rate():
    # raw eigenvalue error shrinks ~4x per mesh halving before extrapolation
    from oscitrace.tridiag import lowest

    errs = []
    for N in (511, 1023, 2047):
        T = discretize(HARMONIC, 1.0, 8.0, N)
        errs.append(abs(float(lowest(T, 1, tol=1e-12)[0]) - 1.0))
    slopes = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    for s in slopes:
        assert 1.8 <= s <= 2.2


def test_tolerance_too_tight_raises():
    with pytest.raises(ConvergenceError):
        compute_spectrum(SpectrumRequest(pencil=HARMONIC, t=1.0, count=3, tol=1e-14))


def test_low_order_warns_experimental():
    shallow = parse_pencil("none", "1:1:0.4")
    with pytest.warns(UserWarning, match="experimental"):
        compute_spectrum(SpectrumRequest(pencil=shallow, t=1.0, count=1, tol=1e-4))
