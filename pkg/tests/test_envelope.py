import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from lyapcl.envelope import (LegendreDomainError, PiecewiseLinear, UnboundedEnvelopeError,
                             dense_hull_envelope, flux_envelope, legendre,
                             lower_convex_envelope, upper_concave_envelope)
from lyapcl.flux import PolyFlux
from lyapcl.oracle import monotone_projection_bruteforce


def random_pl(rng, n=None, free=False):
    n = n or int(rng.integers(2, 30))
    x = np.cumsum(rng.uniform(0.1, 1.0, n))
    y = rng.normal(size=n)
    if free:
        return PiecewiseLinear(x, y, -math.inf, math.inf)
    left = rng.uniform(-3, 0)
    return PiecewiseLinear(x, y, left, left + rng.uniform(0, 3))


def probe_points(pl):
    mids = 0.5 * (pl.x[1:] + pl.x[:-1])
    return np.sort(np.concatenate([pl.x, mids, [pl.x[0] - 1.0, pl.x[-1] + 1.0]]))


def test_convex_input_is_its_own_envelope():
    x = np.linspace(-2, 2, 9)
    psi = PiecewiseLinear(x, x ** 2, -5.0, 5.0)
    res = lower_convex_envelope(psi)
    assert len(res.contacts) == 0
    np.testing.assert_array_equal(res.envelope.x, x)
    np.testing.assert_array_equal(res.envelope.y, x ** 2)


def test_tent_envelope_single_contact():
    psi = PiecewiseLinear([0, 1, 2], [0, 1, 0], 0.0, 0.0)
    res = lower_convex_envelope(psi)
    t = np.linspace(-1, 3, 41)
    np.testing.assert_allclose(res.envelope(t), 0.0, atol=1e-15)
    assert res.contacts.intervals == ((0.0, 2.0, 0.0),)


def test_decreasing_step_two_cells_matches_bruteforce_mean():
    # cells (1, -1) on [-1, 1] with free ends: one bitangent, slope = mean
    psi = PiecewiseLinear([-1, 0, 1], [0, 1, 0], -math.inf, math.inf)
    res = lower_convex_envelope(psi)
    assert len(res.contacts) == 1
    x0, x1, c = res.contacts.intervals[0]
    assert (x0, x1) == (-1.0, 1.0)
    assert c == monotone_projection_bruteforce([1.0, -1.0])[0] == 0.0


def test_crossed_far_field_slopes_raise():
    with pytest.raises(UnboundedEnvelopeError):
        lower_convex_envelope(PiecewiseLinear([0, 1], [0, 0], 1.0, -1.0))


def test_upper_envelope_of_concave_input_is_identity():
    x = np.linspace(-1, 1, 7)
    psi = PiecewiseLinear(x, -x ** 2, 3.0, -3.0)
    res = upper_concave_envelope(psi)
    assert len(res.contacts) == 0
    np.testing.assert_array_equal(res.envelope.y, -x ** 2)


def test_upper_envelope_of_negated_tent():
    psi = PiecewiseLinear([0, 1, 2], [0, -1, 0], 0.0, 0.0)
    res = upper_concave_envelope(psi)
    np.testing.assert_allclose(res.envelope(np.linspace(-1, 3, 9)), 0.0, atol=1e-15)
    assert res.contacts.intervals == ((0.0, 2.0, 0.0),)


def test_semi_infinite_contacts():
    # left ray slope 0 lies below the bump, right ray slope 1 as well
    psi = PiecewiseLinear([0, 1, 2, 3], [0, 1, 1, 3], 0.0, 1.0)
    res = lower_convex_envelope(psi)
    assert not res.contacts.left_unbounded
    psi = PiecewiseLinear([0, 1, 2], [1, 0, 1], 2.0, 2.0)
    res = lower_convex_envelope(psi)
    # slope 2 to the left is steeper than the descent: the left ray is replaced
    assert res.contacts.left_unbounded
    assert res.contacts.intervals[0][0] == -math.inf
    assert res.contacts.intervals[0][2] == 2.0 or res.contacts.intervals[0][2] <= 2.0


def test_collinear_breakpoints_merge_into_one_segment():
    psi = PiecewiseLinear([0, 1, 2, 3, 4], [0, 1, 2, 3, 4], 0.0, 2.0)
    res = lower_convex_envelope(psi)
    # left ray slope 0 then straight line of slope 1: vertices 0 and 4 only
    assert list(res.vertices) == [0, 4]
    assert len(res.contacts) == 0


def test_legendre_of_sampled_square():
    x = np.linspace(-3, 3, 60001)
    pl = PiecewiseLinear(x, 0.5 * x ** 2, -math.inf, math.inf)
    assert legendre(pl, 1.0) == pytest.approx(0.5, abs=1e-8)


def test_legendre_of_affine_function():
    c, b = 0.7, -1.3
    pl = PiecewiseLinear([0.0, 1.0], [b, b + c], c, c)
    assert legendre(pl, c) == pytest.approx(-b, abs=1e-15)
    with pytest.raises(LegendreDomainError):
        legendre(pl, c + 0.1)


def test_legendre_rejects_nonconvex_input():
    with pytest.raises(ValueError):
        legendre(PiecewiseLinear([0, 1, 2], [0, 1, 0], -math.inf, math.inf), 0.0)


def test_envelope_csv_round_trip(tmp_path):
    psi = PiecewiseLinear([0, 1, 2], [0.1, 0.0, 0.2], -1.0, 1.0)
    path = tmp_path / "env.csv"
    lower_convex_envelope(psi).envelope.to_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "x,y"
    assert float(rows[1].split(",")[1]) == 0.1


@pytest.mark.parametrize("seed", range(40))
def test_envelope_structure_on_random_inputs(seed):
    rng = np.random.default_rng(seed)
    psi = random_pl(rng, free=bool(seed % 2))
    res = lower_convex_envelope(psi)
    env = res.envelope
    scale = 1 + np.max(np.abs(psi.y))
    # below the input, convex
    t = probe_points(psi)
    assert np.all(env(t) <= psi(t) + 1e-12 * scale)
    assert env.is_convex()
    # equal to the input off the contacts, affine with slope c_j on them
    inside = np.zeros(psi.x.size, dtype=bool)
    slopes_c = []
    for (x0, x1, c), (i0, i1) in zip(res.contacts.intervals, res.contacts.spans):
        inside[max(i0, 0) + 1 if i0 >= 0 else 0:min(i1, psi.x.size)] = True
        slopes_c.append(c)
        if math.isfinite(x0) and math.isfinite(x1):
            # the primitive's increment equals c_j times the length
            assert psi(x1) - psi(x0) == pytest.approx(c * (x1 - x0), abs=1e-12 * scale)
            # trace ordering: the input leaves x_j at least as steeply as the
            # chord and arrives at y_j no steeper
            s = psi.slopes()
            k0 = int(np.searchsorted(psi.x, x0))
            k1 = int(np.searchsorted(psi.x, x1))
            # slopes() lists the left ray first
            assert s[k0 + 1] >= c - 1e-12 and s[k1] <= c + 1e-12
    assert np.all(np.diff(slopes_c) > 0)
    np.testing.assert_allclose(env(psi.x[~inside]), psi.y[~inside], atol=1e-12 * scale)


@pytest.mark.parametrize("seed", range(20))
def test_envelope_is_idempotent(seed):
    rng = np.random.default_rng(100 + seed)
    psi = random_pl(rng)
    once = lower_convex_envelope(psi).envelope
    twice = lower_convex_envelope(once)
    assert len(twice.contacts) == 0
    np.testing.assert_allclose(twice.envelope.y, once.y, atol=1e-14, rtol=0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.floats(0, 2), min_size=2, max_size=25))
def test_envelope_is_monotone_in_input(seed, bumps):
    rng = np.random.default_rng(seed)
    n = len(bumps)
    x = np.cumsum(rng.uniform(0.1, 1.0, n))
    y1 = rng.normal(size=n)
    psi1 = PiecewiseLinear(x, y1, -1.0, 1.0)
    psi2 = PiecewiseLinear(x, y1 + np.asarray(bumps), -1.0, 1.0)
    t = probe_points(psi1)
    e1 = lower_convex_envelope(psi1).envelope(t)
    e2 = lower_convex_envelope(psi2).envelope(t)
    assert np.all(e1 <= e2 + 1e-12 * (1 + np.max(np.abs(y1))))


@pytest.mark.parametrize("seed", range(10))
def test_envelope_matches_scipy_hull_with_free_ends(seed):
    rng = np.random.default_rng(seed)
    pts = np.column_stack([np.sort(rng.uniform(0, 10, 60)), rng.normal(size=60)])
    pts = pts[np.concatenate([[True], np.diff(pts[:, 0]) > 0])]
    hull = ConvexHull(pts)
    # lower hull: facets whose outward normal points downwards
    lower = {int(i) for eq, simplex in zip(hull.equations, hull.simplices) if eq[1] < 0
             for i in simplex}
    res = lower_convex_envelope(PiecewiseLinear(pts[:, 0], pts[:, 1], -math.inf, math.inf))
    # scipy keeps collinear points out as well, up to its own tolerance
    assert set(res.vertices.tolist()) <= lower | {0, len(pts) - 1}
    ref = np.interp(pts[:, 0], pts[sorted(lower), 0], pts[sorted(lower), 1])
    np.testing.assert_allclose(res.envelope(pts[:, 0]), ref, atol=1e-12)


# ---------------------------------------------------------------------------
# envelopes of polynomial graphs


CUBIC = PolyFlux([0, 0, 0, 1])


def test_cubic_envelope_bitangent():
    env = flux_envelope(CUBIC, -1.0, 1.0)
    chords = [p for p in env.pieces if p.kind == "chord"]
    assert len(chords) == 1
    assert chords[0].start == -1.0
    assert chords[0].end == pytest.approx(0.5, abs=1e-14)
    assert chords[0].slope == pytest.approx(0.75, abs=1e-14)


@pytest.mark.parametrize("coeffs, a, b", [
    ((0, 0, 0, 1), -1, 1),
    ((0, -1, 0, 1), -1.5, 1.5),
    ((0, 0, 1, 0, -1), -1.2, 1.2),
    ((0.3, 1, -2, 0, 1, 0.2), -2, 1.5),
])
@pytest.mark.parametrize("upper", [False, True])
def test_flux_envelope_against_dense_hull(coeffs, a, b, upper):
    f = PolyFlux(coeffs)
    env = flux_envelope(f, a, b, upper=upper)
    xs = np.linspace(a, b, 200_001)
    ys = f(xs)
    sign = -1.0 if upper else 1.0
    ref = dense_hull_envelope(xs, sign * ys)
    curv = np.max(np.abs(np.polynomial.polynomial.polyval(
        xs, np.polynomial.polynomial.polyder(coeffs, 2))))
    tol = 1e-10 * (1 + curv * (b - a) ** 2)
    # the dense hull sits above the true envelope by at most its sampling error
    sampling = curv * ((b - a) / 200_000) ** 2 / 8
    diff = sign * env(xs) - ref(xs)
    assert np.max(diff) <= tol
    assert np.min(diff) >= -(tol + sampling)
    # never on the wrong side of the curve
    assert np.all(sign * (env(xs) - ys) <= tol)


def test_flux_envelope_pieces_tile_the_interval():
    env = flux_envelope(PolyFlux([0, 0, 1, 0, -1]), -1.2, 1.2)
    assert env.pieces[0].start == -1.2 and env.pieces[-1].end == 1.2
    for p, q in zip(env.pieces[:-1], env.pieces[1:]):
        assert p.end == q.start


def test_flux_envelope_piecewise_linear_copy_is_convex_and_close():
    f = PolyFlux([0, -1, 0, 1])
    env = flux_envelope(f, -1.5, 1.5)
    pl = env.as_piecewise_linear()
    assert pl.is_convex()
    xs = np.linspace(-1.5, 1.5, 5001)
    # interpolation tolerance 1e-12 * (1 + max|f''| * width^2), max|f''| = 9
    assert np.max(np.abs(pl(xs) - env(xs))) <= 1e-12 * (1 + 9 * 3 ** 2)
