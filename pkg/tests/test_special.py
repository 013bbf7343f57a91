import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special as sp

from rwimaging.special import bessel_j0, crossrange_profile, range_profile, struve_h0

X = np.concatenate([np.linspace(0, 15.99, 400), np.linspace(16, 80, 300)])


def test_j0_against_scipy():
    np.testing.assert_allclose(bessel_j0(X), sp.j0(X), rtol=0, atol=1e-10)


def test_h0_against_scipy():
    np.testing.assert_allclose(struve_h0(X), sp.struve(0, X), rtol=0, atol=1e-8)


def test_high_precision_reference_at_five():
    mpmath.mp.dps = 30
    j0 = float(mpmath.besselj(0, 5))
    h0 = float(mpmath.struveh(0, 5))
    assert abs(bessel_j0(5.0) / j0 - 1) < 1e-10
    assert abs(struve_h0(5.0) / h0 - 1) < 1e-10


def test_first_zero_of_j0():
    from scipy.optimize import brentq
    root = brentq(lambda x: float(bessel_j0(x)), 2.0, 3.0, xtol=1e-14)
    assert root == pytest.approx(2.404825557695773, abs=1e-10)
    k = 2 * np.pi
    assert root / k == pytest.approx(0.3827, abs=1e-4)


@given(st.floats(-60, 60))
def test_parity(x):
    assert bessel_j0(-x) == bessel_j0(x)
    assert struve_h0(-x) == -struve_h0(x)


def test_profiles_at_origin():
    k = 2 * np.pi
    assert crossrange_profile(k, 0.0) == pytest.approx(np.pi / 2)
    assert range_profile(k, 0.0) == pytest.approx(np.pi / 2)
    assert abs(range_profile(k, 0.0)) == pytest.approx(np.pi / 2)
    assert crossrange_profile(k, 0.3) == crossrange_profile(k, -0.3)
