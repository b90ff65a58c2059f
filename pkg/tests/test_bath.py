import math

import mpmath
import numpy as np
import pytest

from spinlind import ArgumentError, bath_rates, bose_occupation
from spinlind.bath import rate_arrays


def exact(omega, t):
    with mpmath.workdps(40):
        return float(1 / mpmath.expm1(mpmath.mpf(omega) / mpmath.mpf(t)))


@pytest.mark.parametrize("omega,t", [(1.0, 10.0), (1.0, 1.0), (5.0, 10.0), (0.3, 17.0)])
def test_occupation_closed_form(omega, t):
    assert bose_occupation(omega, t) == pytest.approx(exact(omega, t), rel=1e-14)


def test_occupation_reference_value():
    assert bose_occupation(1.0, 10.0) == pytest.approx(9.5083, abs=5e-5)


def test_extreme_ratios():
    assert bose_occupation(1000.0, 1.0) == pytest.approx(math.exp(-1000.0), rel=1e-12)
    assert bose_occupation(1e5, 1.0) == 0.0
    x = 1e-10
    assert bose_occupation(x, 1.0) == pytest.approx(exact(x, 1.0), rel=1e-8)
    assert np.isfinite(bose_occupation(np.array([1e-12, 1.0, 1e4]), 1.0)).all()


def test_monotone_in_temperature():
    t = np.linspace(0.1, 20, 200)
    n = bose_occupation(2.0, t)
    assert np.all(np.diff(n) > 0)
    assert bose_occupation(2.0, 1e-3) < 1e-300


def test_rejects_bad_inputs():
    for args in ((0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)):
        with pytest.raises(ArgumentError):
            bose_occupation(*args)
    with pytest.raises(ArgumentError):
        bath_rates(1.0, -1e-3, 2.0)


def test_rates():
    r = bath_rates(1.0, 0.0, 3.0)
    assert (r.j_plus, r.j_minus) == (0.0, 0.0)
    r = bath_rates(1.0, 0.001, 10.0)
    assert r.j_minus - r.j_plus == pytest.approx(0.001, abs=1e-15)


def test_detailed_balance(rng):
    for _ in range(100):
        w, k, t = rng.uniform(0.01, 30), rng.uniform(1e-4, 1e-2), rng.uniform(0.5, 20)
        r = bath_rates(w, k, t)
        assert 0 <= r.j_plus < r.j_minus
        assert r.j_plus * math.exp(w / t) == pytest.approx(r.j_minus, rel=1e-12)


def test_rate_arrays_extended_precision():
    w = np.array([1.0, 2.0], dtype=np.longdouble)
    jp, jm = rate_arrays(w, np.array([1e-3, 0.0]), np.array([2.0, np.nan]))
    assert jp.dtype == np.longdouble
    assert jp[1] == 0 and jm[1] == 0
    assert float(jm[0] - jp[0]) == pytest.approx(1e-3, rel=1e-15)
