import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapcl.flux import (MAX_DEGREE, PolyFlux, bitangent_slopes, chord, derivative, eval_flux,
                         lipschitz_bound)

BURGERS = PolyFlux([0, 0, 0.5])
CUBIC = PolyFlux([0, 0, 0, 1])

coeff = st.floats(-3, 3, allow_nan=False)
flux_strategy = st.lists(coeff, min_size=1, max_size=6).map(PolyFlux)


@pytest.mark.parametrize("f, u, expected", [
    (BURGERS, 2.0, 2.0),
    (CUBIC, -1.0, -1.0),
    (PolyFlux([0]), 7.0, 0.0),
])
def test_eval(f, u, expected):
    assert eval_flux(f, u) == expected


def test_horner_matches_exact_rational_arithmetic():
    coeffs = [0.5, -1.25, 3.0, 0.75, -2.0]
    f = PolyFlux(coeffs)
    for num in range(-8, 9):
        u = num / 8
        exact = sum(Fraction(c) * Fraction(u) ** k for k, c in enumerate(coeffs))
        assert f(u) == pytest.approx(float(exact), abs=1e-15)


def test_trailing_zeros_trimmed_and_degree_cap():
    assert PolyFlux([1, 2, 0, 0]).degree == 1
    assert PolyFlux([0, 0]).degree == 0
    with pytest.raises(ValueError):
        PolyFlux([0] * (MAX_DEGREE + 1) + [1])


@pytest.mark.parametrize("f, expected", [
    (CUBIC, (0, 0, 3)),
    (PolyFlux([5]), (0,)),
    (BURGERS, (0, 1)),
])
def test_derivative(f, expected):
    assert derivative(f).coeffs == tuple(float(c) for c in expected)


@pytest.mark.parametrize("f, a, b, expected", [
    (BURGERS, -2, 2, 2.0),
    (CUBIC, -1, 1, 3.0),
    (PolyFlux([0, -1, 0, 1]), -1, 1, 2.0),
])
def test_lipschitz_bound(f, a, b, expected):
    assert lipschitz_bound(f, a, b) == pytest.approx(expected, abs=1e-12)


def test_lipschitz_bound_against_dense_sampling():
    f = PolyFlux([0, -1, 0, 1])
    grid = np.linspace(-1, 1, 200001)
    dense = np.max(np.abs(3 * grid ** 2 - 1))
    assert lipschitz_bound(f, -1, 1) == pytest.approx(dense, abs=1e-9)


def test_lipschitz_bound_catches_interior_maximum():
    # |f'| = |u - u^3/3|' peaks inside: f' = 1 - u^2 on [-0.5, 0.5] peaks at 0
    f = PolyFlux([0, 1, 0, -1 / 3])
    assert lipschitz_bound(f, -0.5, 0.5) == pytest.approx(1.0, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(flux_strategy, st.floats(-2, 0), st.floats(0, 2), st.floats(0, 1), st.floats(0, 1))
def test_lipschitz_bound_monotone_in_interval(f, a, b, s, t):
    inner_a, inner_b = a + s * (b - a) * 0.5, b - t * (b - a) * 0.5
    assert lipschitz_bound(f, inner_a, inner_b) <= lipschitz_bound(f, a, b) + 1e-12


@pytest.mark.parametrize("f, ul, ur, slope", [
    (BURGERS, -1, 1, 0.0),
    (CUBIC, -1, 0.5, 0.75),
    (BURGERS, 0, 2, 1.0),
])
def test_chord_slope(f, ul, ur, slope):
    assert chord(f, ul, ur).slope == pytest.approx(slope, abs=1e-15)


def test_chord_rejects_equal_states():
    with pytest.raises(ValueError):
        chord(BURGERS, 1.0, 1.0)


def test_chord_difference_quotient_random():
    rng = np.random.default_rng(4)
    for _ in range(1000):
        f = PolyFlux(rng.uniform(-2, 2, rng.integers(1, 6)))
        ul, ur = rng.uniform(-2, 2, 2)
        c = chord(f, ul, ur)
        quotient = (f(ur) - f(ul)) / (ur - ul)
        assert c.slope == pytest.approx(quotient, rel=1e-13, abs=1e-300)
        # the chord passes through both end states
        assert c(ul) == pytest.approx(f(ul), abs=1e-12)
        assert c(ur) == pytest.approx(f(ur), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(flux_strategy, st.floats(-2, 2))
def test_derivative_matches_centered_difference(f, u):
    step = 1e-6
    fd = (f(u + step) - f(u - step)) / (2 * step)
    exact = derivative(f)(u)
    assert abs(fd - exact) <= 1e-6 * (1 + abs(exact))


def test_critical_points_are_roots_of_derivative():
    f = PolyFlux([0, -1, 0, 1])
    assert sorted(f.critical_points) == pytest.approx([-1 / math.sqrt(3), 1 / math.sqrt(3)],
                                                      abs=1e-14)
    assert PolyFlux([1, 2]).critical_points.size == 0


@pytest.mark.parametrize("f", [BURGERS, CUBIC])
def test_bitangent_identical_intervals_zero_offsets(f):
    assert bitangent_slopes(f, (-1, 1), (-1, 1), (1.0, 0.0, 0.0), 0.1) == [0.0]


def test_bitangent_burgers_example():
    roots = bitangent_slopes(BURGERS, (-1, 1), (-1, 1), (1.0, 0.3, 0.3), 0.1)
    assert roots == [0.0]


def test_bitangent_cubic_against_dense_scan():
    # envelopes written out by hand: u^3 is convex on [0, 1]; on [-1, 1/2]
    # the lower envelope is the chord from -1 to 1/2 (tangent there, since
    # 3a^2 = (a^3 + 1) / (a + 1) at a = 1/2)
    def e1(theta):
        return -1 + 0.75 * (theta + 1)

    def e2(theta):
        return theta ** 3

    spacing, c1, c2, t = 0.2, 0.05, 0.14, 0.5
    theta = np.linspace(0.0, 0.5, 2_000_001)
    g = spacing * theta + t * (e2(theta) - e1(theta)) - (c2 - c1)
    idx = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]
    # linear interpolation inside each sign-change bracket
    scan = [theta[i] - g[i] * (theta[i + 1] - theta[i]) / (g[i + 1] - g[i]) for i in idx]
    roots = bitangent_slopes(CUBIC, (-1, 0.5), (0, 1), (spacing, c1, c2), t)
    assert len(roots) == len(scan) == 2
    assert roots == pytest.approx(scan, abs=1e-9)


def test_bitangent_disjoint_intervals_empty():
    assert bitangent_slopes(BURGERS, (-2, -1), (1, 2), (1.0, 0.0, 0.0), 0.1) == []
