import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwimaging.errors import (
    ConfigurationError,
    NarrowbandError,
    NoPropagatingModesError,
    StandingWaveError,
)
from rwimaging.quadrature import composite_gauss_legendre
from rwimaging.spectral import (
    K_0,
    OMEGA_0,
    WaveguideGeometry,
    axial_wavenumbers,
    build_mode_basis,
    check_narrowband,
    eigenfunction,
    exact_axial_wavenumbers,
    group_slowness,
    ideal_green,
    mode_count,
    mode_matrix,
)


def test_mode_count_examples():
    assert mode_count(WaveguideGeometry(20.0), OMEGA_0) == 40
    assert mode_count(WaveguideGeometry(39.4 / 2), OMEGA_0) == 39
    assert mode_count(WaveguideGeometry(0.4), OMEGA_0) == 1


def test_no_propagating_modes():
    with pytest.raises(NoPropagatingModesError):
        mode_count(WaveguideGeometry(0.2), OMEGA_0)


def test_standing_wave_rejected():
    # mode N exactly at cutoff: k D / pi = N - 1/2
    with pytest.raises(StandingWaveError):
        build_mode_basis(WaveguideGeometry(19.75), OMEGA_0)


def test_invalid_geometry():
    with pytest.raises(ConfigurationError):
        WaveguideGeometry(-1.0)
    with pytest.raises(ConfigurationError):
        WaveguideGeometry(1.0, background_speed=0.0)


def test_reference_wavenumbers(basis):
    b = basis.axial_wavenumbers / K_0
    assert b[0] == pytest.approx(np.sqrt(1 - (1 / 80) ** 2), abs=1e-12)
    assert b[0] == pytest.approx(0.999922, abs=1e-6)
    # sqrt(1 - 0.9875^2) = 0.1576190...
    assert b[39] == pytest.approx(0.157619, abs=1e-6)
    # sqrt(1 - 0.4875^2) = 0.8731231...
    assert b[19] == pytest.approx(0.873123, abs=1e-6)


def test_dispersion_relation(basis):
    k2 = basis.axial_wavenumbers**2 + basis.transverse_wavenumbers**2
    np.testing.assert_allclose(k2, basis.wavenumber**2, rtol=1e-14)
    assert np.all(np.diff(basis.axial_wavenumbers) < 0)
    mu_next = np.pi * (basis.mode_count + 0.5) / basis.depth
    assert basis.wavenumber**2 - mu_next**2 < 0


def test_eigenfunction_boundary_values(basis):
    j = basis.indices
    np.testing.assert_allclose(eigenfunction(basis, j, basis.depth), 0.0, atol=1e-13)
    np.testing.assert_allclose(eigenfunction(basis, j, 0.0), np.sqrt(2 / basis.depth))
    np.testing.assert_allclose(eigenfunction(basis, j, basis.depth / 2) ** 2, 1 / basis.depth,
                               rtol=1e-12)


def test_eigenfunction_domain_checks(basis):
    with pytest.raises(ConfigurationError):
        eigenfunction(basis, 1, -0.1)
    with pytest.raises(ConfigurationError):
        eigenfunction(basis, 0, 1.0)
    # evanescent indices are allowed
    assert np.isfinite(eigenfunction(basis, 55, 3.0))


def test_orthonormality(basis):
    x, w = composite_gauss_legendre(0.0, basis.depth, basis.depth / 200)
    phi = mode_matrix(basis, x)
    gram = (phi * w) @ phi.T
    np.testing.assert_allclose(gram, np.eye(basis.mode_count), atol=1e-10)


def test_group_slowness_matches_finite_difference(basis):
    h = 1e-6 * OMEGA_0
    plus = exact_axial_wavenumbers(basis.geometry, basis.mode_count, OMEGA_0 + h)
    minus = exact_axial_wavenumbers(basis.geometry, basis.mode_count, OMEGA_0 - h)
    fd = (plus - minus) / (2 * h)
    np.testing.assert_allclose(group_slowness(basis), fd, rtol=1e-6)
    assert 1 / group_slowness(basis, 40) == pytest.approx(0.157619, abs=1e-6)


def test_group_slowness_index_check(basis):
    with pytest.raises(ConfigurationError):
        group_slowness(basis, 41)


def test_narrowband_check(basis):
    geom = basis.geometry
    assert check_narrowband(geom, OMEGA_0 * 0.999, OMEGA_0 * 1.001) == 40
    with pytest.raises(NarrowbandError):
        check_narrowband(geom, OMEGA_0 * 0.975, OMEGA_0 * 1.025)
    with pytest.raises(NarrowbandError):
        axial_wavenumbers(basis, [OMEGA_0 * 0.975, OMEGA_0], dispersion="exact")


def test_linear_dispersion_error_is_second_order(basis):
    errs = []
    for d in (1e-3, 5e-4):
        lin = axial_wavenumbers(basis, [OMEGA_0 + d])[:, 0]
        exact = axial_wavenumbers(basis, [OMEGA_0 + d], dispersion="exact")[:, 0]
        errs.append(np.abs(lin - exact))
    np.testing.assert_allclose(errs[0] / errs[1], 4.0, rtol=1e-2)


def test_green_single_mode_and_zero_gap():
    b1 = build_mode_basis(WaveguideGeometry(0.4))
    g = ideal_green(b1, 0.1, 0.2, np.linspace(0, 10, 7))
    expected = eigenfunction(b1, 1, 0.1) * eigenfunction(b1, 1, 0.2) / (2 * b1.axial_wavenumbers[0])
    np.testing.assert_allclose(np.abs(g), expected, rtol=1e-14)


def test_green_at_zero_gap_is_imaginary(basis):
    g = ideal_green(basis, 5.0, 5.0, 0.0)
    assert g.real == 0.0 and g.imag < 0


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 20), st.floats(0, 20), st.floats(0, 500))
def test_green_reciprocity(basis, xr, x, gap):
    assert ideal_green(basis, xr, x, gap) == ideal_green(basis, x, xr, gap)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.3, 60.0))
def test_mode_count_brackets_cutoff(depth):
    geom = WaveguideGeometry(depth)
    try:
        n = mode_count(geom, OMEGA_0)
    except NoPropagatingModesError:
        assert K_0 * depth / np.pi < 0.5
        return
    mu = np.pi * (np.arange(1, n + 2) - 0.5) / depth
    assert K_0**2 - mu[n - 1] ** 2 >= 0
    assert K_0**2 - mu[n] ** 2 < 0
