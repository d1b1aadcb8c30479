import math

import numpy as np
from hypothesis import given, strategies as st

from billiardcorr import io as bio
from billiardcorr.correlation import CorrelationGrid, angular_average, error_metric, image_sum
from billiardcorr.randwave import GridSampler, evaluate_adapted, sample_free_wave
from billiardcorr.specfun import bessel_j0, bessel_j1, bessel_y0, bessel_y1
from billiardcorr.symmetry import (apply, compose, inverse, reflection, rotation, same_map,
                                   translation, wedge_group)

positive = st.floats(1e-3, 200.0)
coord = st.floats(-3.0, 3.0)
angle = st.floats(-math.pi, math.pi)


@given(positive)
def test_bessel_bounds_and_parity(x):
    assert abs(bessel_j0(x)) <= 1.0 and abs(bessel_j1(x)) <= 0.6
    assert bessel_j0(-x) == bessel_j0(x) and bessel_j1(-x) == -bessel_j1(x)


@given(st.floats(0.05, 200.0))
def test_wronskian_pointwise(x):
    w = bessel_j1(x) * bessel_y0(x) - bessel_j0(x) * bessel_y1(x)
    assert abs(w - 2 / (math.pi * x)) <= 1e-12 * max(1.0, 2 / (math.pi * x))


def _isometry(kind, t, x, y):
    if kind == 0:
        return rotation(t)
    if kind == 1:
        return reflection(t)
    return compose(translation((x, y)), rotation(t))


isometries = st.builds(_isometry, st.integers(0, 2), angle, coord, coord)


@given(isometries, isometries, isometries, coord, coord)
def test_composition_laws(a, b, c, x, y):
    p = np.array([x, y])
    np.testing.assert_allclose(apply(compose(a, b), p), apply(a, apply(b, p)), atol=1e-12)
    assert same_map(compose(compose(a, b), c), compose(a, compose(b, c)), atol=1e-12)
    np.testing.assert_allclose(apply(inverse(a), apply(a, p)), p, atol=1e-12)
    assert compose(a, b).parity == a.parity * b.parity


def _wedge_point(n, r, u):
    phi = u * math.pi / n
    return np.array([r * math.cos(phi), r * math.sin(phi)])


@given(st.integers(1, 6), st.floats(0.05, 1.0), st.floats(0, 1), st.floats(0.05, 1.0),
       st.floats(0, 1))
def test_theory_symmetric_and_covariant(n, r1, u1, r2, u2):
    g = wedge_group(n)
    x, y = _wedge_point(n, r1, u1), _wedge_point(n, r2, u2)
    k = 50.0
    cxy = image_sum(g, k, x, y[None])[0]
    assert abs(cxy - image_sum(g, k, y, x[None])[0]) <= 1e-12
    # moving the second point by a group element multiplies by its character
    for e in g:
        assert abs(image_sum(g, k, x, apply(e, y)[None])[0] - e.parity * cxy) <= 1e-11


@given(st.integers(1, 5), st.integers(0, 10_000), st.floats(0.05, 1.0), st.floats(0.02, 0.98))
def test_fast_sampler_matches_pointwise(n, index, r, u):
    g = wedge_group(n)
    w = sample_free_wave(40.0, 16, seed=3, index=index)
    p = _wedge_point(n, r, u)
    v = evaluate_adapted(w, g, p)
    sampler = GridSampler(g, p, 0.01, 3)
    assert abs(sampler.values(w)[1, 1] - v) <= 1e-12 * max(1.0, abs(v))


@given(st.floats(0.1, 10.0), st.floats(-2.0, 2.0), st.integers(0, 1000))
def test_error_metric_scaling(scale, t, seed):
    rng = np.random.default_rng(seed)
    th = rng.normal(size=(9, 9))
    grid = lambda v: CorrelationGrid((0, 0), 1.0, 1.0, 9, v)
    m = error_metric(grid((1 + t) * th), grid(th))
    assert math.isclose(m, t * t, rel_tol=1e-12, abs_tol=1e-15)
    assert math.isclose(error_metric(grid(scale * (1 + t) * th), grid(scale * th)), m,
                        rel_tol=1e-10, abs_tol=1e-15)


@given(st.floats(-5, 5), st.integers(4, 12), st.integers(3, 20))
def test_angular_average_of_constant(c, bins, half):
    res = 2 * half + 1
    prof = angular_average(CorrelationGrid((0, 0), 1.0, 1.0, res, np.full((res, res), c)),
                           bins)
    np.testing.assert_allclose(prof.means, c, rtol=1e-12, atol=1e-15)
    assert np.all(np.diff(prof.radii) > 0)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=5))
def test_number_format_round_trip(values):
    assert bio.parse_floats(bio.format_value([float(v) for v in values])) == tuple(values)
