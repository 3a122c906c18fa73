import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oscitrace import (
    HomogeneousTerm,
    PencilPotential,
    Potential,
    evaluate,
    evaluate_pencil,
    homogeneity_residual,
    parse_pencil,
    parse_potential,
    validate_conditions,
)

X2 = parse_potential("1:1:2")
X4 = parse_potential("1:1:4")


@pytest.mark.parametrize(
    "potential, x, expected",
    [
        (X2, 3.0, 9.0),
        (parse_potential("1:1:4"), -2.0, 16.0),
        (parse_potential("2:3:1"), -1.0, 3.0),
        (X2, 0.0, 0.0),
    ],
)
def test_evaluate_examples(potential, x, expected):
    assert_allclose(evaluate(potential, x), expected, rtol=1e-14)


def test_evaluate_vectorized_matches_scalar():
    # numpy's vector pow and libm pow may differ in the last ulp
    pot = parse_potential("1:2:2,0.5:0.5:4")
    xs = np.linspace(-3, 3, 41)
    assert_allclose(pot(xs), [pot(float(x)) for x in xs], rtol=1e-15)


@pytest.mark.parametrize(
    "v0, v1, t, x, expected",
    [
        ("1:1:2", "1:1:4", 2.0, 1.0, 3.0),
        ("none", "1:1:2", 4.0, 1.0, 4.0),
        ("1:1:2", "1:1:4", 1.0, 0.0, 0.0),
    ],
)
def test_evaluate_pencil_examples(v0, v1, t, x, expected):
    pencil = parse_pencil(v0, v1)
    assert_allclose(evaluate_pencil(pencil, t, x), expected, rtol=1e-14)


def test_pencil_rejects_nonpositive_t():
    pencil = parse_pencil("none", "1:1:2")
    with pytest.raises(ValueError):
        evaluate_pencil(pencil, 0.0, 1.0)
    with pytest.raises(ValueError):
        evaluate_pencil(pencil, -2.0, 1.0)


@pytest.mark.parametrize(
    "rho, xi, x",
    [(2.0, 3.0, 2.0), (0.5, 4.0, 1.0)],
)
def test_homogeneity_examples(rho, xi, x):
    term = HomogeneousTerm(1.0, 1.0, rho)
    assert homogeneity_residual(term, xi, x) <= 1e-15


def test_homogeneity_exact_at_unit_scale():
    term = HomogeneousTerm(2.0, 5.0, 4.0)
    for x in (-7.0, 0.0, 0.3, 11.0):
        assert homogeneity_residual(term, 1.0, x) == 0.0


def test_homogeneity_property_random():
    # scaling identity defect stays at the rounding level (the examples pin
    # the bound at 1e-15) for random orders, scales and arguments
    rng = np.random.default_rng(42)
    for _ in range(3000):
        term = HomogeneousTerm(
            float(rng.uniform(0.1, 10.0)),
            float(rng.uniform(0.1, 10.0)),
            float(rng.uniform(0.3, 6.0)),
        )
        xi = float(np.exp(rng.uniform(np.log(1e-3), np.log(1e3))))
        x = float(rng.uniform(-50.0, 50.0))
        assert homogeneity_residual(term, xi, x) <= 1e-15


def test_evenness_detection():
    assert parse_potential("1:1:2").is_even
    assert not parse_potential("1:2:2").is_even
    pencil = parse_pencil("1:1:2", "1:1:4")
    assert pencil.is_even
    assert not parse_pencil("1:1:2", "1:2:4").is_even


def test_even_iff_symmetric_samples():
    rng = np.random.default_rng(3)
    even = parse_potential("1:1:2,2:2:4")
    skew = parse_potential("1:1:2,2:3:4")
    xs = rng.uniform(0.1, 10.0, size=50)
    assert_allclose(even(xs), even(-xs), rtol=0, atol=0)
    assert np.all(np.abs(skew(xs) - skew(-xs)) > 0)


def test_monotone_on_half_axes():
    rng = np.random.default_rng(11)
    pot = parse_potential("0.7:1.3:0.8,1:1:3")
    for _ in range(200):
        x1, x2 = np.sort(rng.uniform(0.0, 20.0, size=2))
        if x1 == x2:
            continue
        assert pot(x1) < pot(x2)
        assert pot(-x1) < pot(-x2)


@pytest.mark.parametrize(
    "v0, v1, expected_growth",
    [("none", "1:1:2", 2.0), ("1:1:2", "1:1:4", 4.0), ("none", "1:1:0.5", 0.5)],
)
def test_validate_conditions(v0, v1, expected_growth):
    report = validate_conditions(parse_pencil(v0, v1))
    assert report.positivity_ok
    assert report.unboundedness_ok
    assert report.growth_ok
    assert_allclose(report.growth_exponent, expected_growth)


def test_constructor_rejections():
    with pytest.raises(ValueError):
        HomogeneousTerm(0.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        HomogeneousTerm(1.0, -1.0, 2.0)
    with pytest.raises(ValueError):
        HomogeneousTerm(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        Potential(())
    with pytest.raises(ValueError):
        PencilPotential(v0=None, v1=None)


def test_parse_roundtrip():
    pot = parse_potential("1:16:4,2:2:1")
    assert len(pot.terms) == 2
    assert pot.terms[0].c_minus == 16.0
    assert parse_pencil("none", "1:1:2").v0 is None
    with pytest.raises(ValueError):
        parse_potential("1:2")
    with pytest.raises(ValueError):
        parse_potential("a:b:c")
