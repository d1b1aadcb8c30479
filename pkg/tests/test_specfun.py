import math

import numpy as np
import pytest

from billiardcorr.specfun import (bessel_all, bessel_j0, bessel_j1, bessel_y0, bessel_y1,
                                  helmholtz_kernel)

import oracles

# sample points: dense near the regime switches (4, 25) and the contract edge 8
POINTS = np.unique(np.concatenate([
    np.linspace(1e-3, 60.0, 97),
    [0.5, 1.0, 2.404825557695773, 3.999999, 4.0, 4.000001, 7.999999, 8.0, 8.000001,
     24.99999, 25.0, 25.00001],
]))


@pytest.fixture(scope="module")
def reference():
    ref = {}
    for name, f in [("j0", lambda x: oracles.series_j(0, x)),
                    ("j1", lambda x: oracles.series_j(1, x)),
                    ("y0", oracles.series_y0), ("y1", oracles.series_y1)]:
        ref[name] = np.array([float(f(x)) for x in POINTS])
    return ref


def _tolerance(x, scale):
    # absolute 1e-13 on the series range, 1e-12 of the envelope beyond
    env = np.sqrt(2 / (np.pi * np.maximum(x, 1e-300)))
    return np.where(x <= 8.0, 1e-13 * np.maximum(1.0, np.abs(scale)), 1e-12 * env)


@pytest.mark.parametrize("name,func", [("j0", bessel_j0), ("j1", bessel_j1),
                                       ("y0", bessel_y0), ("y1", bessel_y1)])
def test_against_series_oracle(reference, name, func):
    got = func(POINTS)
    ref = reference[name]
    bad = np.abs(got - ref) > _tolerance(POINTS, ref)
    assert not bad.any(), list(zip(POINTS[bad], got[bad], ref[bad]))


def test_bessel_all_matches_single_functions():
    x = POINTS
    j0, j1, y0, y1 = bessel_all(x)
    np.testing.assert_array_equal(j0, bessel_j0(x))
    np.testing.assert_array_equal(j1, bessel_j1(x))
    np.testing.assert_allclose(y0, bessel_y0(x), rtol=0, atol=1e-15)
    np.testing.assert_array_equal(y1, bessel_y1(x))


# frozen oracle outputs ([DERIVED] examples)
def test_frozen_oracle_values_reproduce():
    assert float(oracles.series_j(0, 1)) == pytest.approx(0.7651976865579666, abs=1e-16)
    assert float(oracles.series_j(1, 1)) == pytest.approx(0.4400505857449335, abs=1e-16)
    assert float(oracles.series_y0(1)) == pytest.approx(0.0882569642156770, abs=1e-16)
    z = oracles.bisect_zero(lambda t: oracles.series_j(0, t), 2.0, 3.0)
    assert float(z) == pytest.approx(2.404825557695773, abs=1e-15)
    z1 = oracles.bisect_zero(lambda t: oracles.series_j(1, t), 3.5, 4.0)
    assert float(z1) == pytest.approx(3.8317059702075123, abs=1e-15)


def test_examples():
    assert bessel_j0(0.0) == 1.0
    assert bessel_j1(0.0) == 0.0
    assert abs(bessel_j0(2.404825557695773)) <= 1e-12
    assert bessel_j0(1.0) == pytest.approx(0.7651976865579666, abs=1e-12)
    assert bessel_j1(1.0) == pytest.approx(0.4400505857449335, abs=1e-12)
    assert abs(bessel_j1(3.8317059702075123)) <= 1e-12
    assert bessel_y0(1.0) == pytest.approx(0.0882569642156770, abs=1e-11)


def test_scalar_in_scalar_out():
    assert isinstance(bessel_j0(1.0), float)
    assert isinstance(bessel_y1(2.0), float)
    assert bessel_j0(np.array([[1.0, 2.0]])).shape == (1, 2)


def test_domain_errors():
    with pytest.raises(ValueError):
        bessel_y0(0.0)
    with pytest.raises(ValueError):
        bessel_y1(-1.0)
    with pytest.raises(ValueError):
        bessel_j0(np.nan)
    with pytest.raises(ValueError):
        bessel_j1(np.inf)
    with pytest.raises(ValueError):
        helmholtz_kernel(1.0, 0.0)
    with pytest.raises(ValueError):
        helmholtz_kernel(-1.0, 1.0)


def test_wronskian():
    x = np.linspace(0.1, 50.0, 10_000)
    w = bessel_j1(x) * bessel_y0(x) - bessel_j0(x) * bessel_y1(x)
    assert np.max(np.abs(w - 2 / (np.pi * x))) <= 1e-11


def test_derivative_identity():
    h = 1e-6
    x = np.linspace(1e-3, 50.0, 5000)
    d = (bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h)
    assert np.max(np.abs(d + bessel_j1(x))) <= 1e-9


def test_envelope_bound():
    x = np.linspace(1e-4, 500.0, 200_000)
    bound = np.minimum(1.0, np.sqrt(2 / (np.pi * x)) * 1.03)
    assert np.all(np.abs(bessel_j0(x)) <= bound)


def test_evenness_exact():
    x = np.linspace(0, 80, 4001)
    np.testing.assert_array_equal(bessel_j0(-x), bessel_j0(x))
    np.testing.assert_array_equal(bessel_j1(-x), -bessel_j1(x))


def test_helmholtz_kernel():
    v = helmholtz_kernel(1.0, 1.0)
    assert isinstance(v, complex)
    assert v.imag == pytest.approx(0.19129942163949165, abs=1e-12)
    assert v.real == pytest.approx(-bessel_y0(1.0) / 4, abs=1e-15)
    assert helmholtz_kernel(2.0, 0.5) == helmholtz_kernel(1.0, 1.0)
    arr = helmholtz_kernel(3.0, np.array([0.1, 0.2]))
    assert arr.shape == (2,)


def test_large_argument_phase():
    # modulus expansion J0^2 + Y0^2 ~ 2/(pi x) (1 - 1/(8x^2) + 27/(128x^4) - ...)
    x = np.array([100.0, 1000.0, 1e5])
    m2 = bessel_j0(x) ** 2 + bessel_y0(x) ** 2
    series = 1 - 1 / (8 * x ** 2) + 27 / (128 * x ** 4)
    np.testing.assert_allclose(m2 * np.pi * x / 2, series, rtol=1e-11)
    assert math.isfinite(bessel_j0(1e8))
