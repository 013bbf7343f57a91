import csv
import dataclasses

import numpy as np
import pytest

from rwimaging.errors import ConfigurationError, ModelInconsistencyError
from rwimaging.pulse import Pulse, frequency_grid
from rwimaging.spectral import OMEGA_0, eigenfunction, mode_matrix
from rwimaging.stochastic import mean_amplitude
from rwimaging.synthesis import (
    ArrayGeometry,
    ModalData,
    ReceiverField,
    ar1_process,
    decoherence_frequency,
    default_array,
    full_aperture_array,
    ideal_array_data,
    ideal_source_amplitudes,
    mode_decompose,
    receiver_field,
    surrogate_random_data,
    to_amplitudes,
    to_projected,
    write_modal_csv,
    write_receiver_csv,
)

PULSE = Pulse.from_relative_band(0.0625)
X_O = 10.0


@pytest.fixture(scope="module")
def grid(boundary_stats):
    omega_c = decoherence_frequency(boundary_stats)
    return frequency_grid(PULSE, step=omega_c / 2)


class TestArrays:
    def test_default_layout(self):
        a = default_array(100.0)
        assert a.receivers.size == 39
        assert a.extent == (0.5, 19.5)
        assert a.coverage(20.0) == pytest.approx(0.95)

    def test_full_aperture(self):
        a = full_aperture_array(20.0, 50.0)
        assert a.extent == (0.0, 20.0)
        assert a.receivers.size == 41

    def test_sparse_array_warns(self):
        with pytest.warns(UserWarning, match="half a wavelength"):
            ArrayGeometry(10.0, np.array([1.0, 2.0, 3.0]))

    def test_invalid_receivers(self):
        with pytest.raises(ConfigurationError):
            ArrayGeometry(10.0, np.array([2.0, 1.0]))
        with pytest.raises(ConfigurationError):
            ArrayGeometry(10.0, np.array([]))


class TestModalData:
    def test_shape_checks(self):
        with pytest.raises(ConfigurationError):
            ModalData(np.array([1.0, 2.0]), np.zeros((3, 3)), 10.0, "ideal")
        with pytest.raises(ConfigurationError):
            ModalData(np.array([2.0, 1.0]), np.zeros((3, 2)), 10.0, "ideal")
        with pytest.raises(ConfigurationError):
            ModalData(np.array([1.0, 2.0]), np.zeros((3, 2)), 10.0, "ideal", form="pressure")

    def test_form_round_trip(self, basis):
        omega = OMEGA_0 + np.linspace(-0.2, 0.2, 5)
        amps, _ = ideal_source_amplitudes(basis, PULSE, X_O, omega)
        data = ModalData(omega, amps, 37.0, "ideal")
        proj = ModalData(omega, to_projected(data, basis), 37.0, "ideal", form="projected")
        np.testing.assert_allclose(to_amplitudes(proj, basis), amps, rtol=1e-12, atol=1e-15)


class TestIdealData:
    omega = OMEGA_0 + np.linspace(-0.3, 0.3, 9)

    def test_source_amplitude_phase(self, basis):
        amps, _ = ideal_source_amplitudes(basis, PULSE, X_O, OMEGA_0)
        phi = eigenfunction(basis, basis.indices, X_O)
        ref = phi * np.pi / PULSE.bandwidth
        np.testing.assert_allclose(amps[:, 0] * 2j * np.sqrt(basis.axial_wavenumbers), ref, rtol=1e-13)
        np.testing.assert_allclose(np.angle(amps[:, 0] / ref), -np.pi / 2, atol=1e-13)

    def test_null_and_outside_band(self, basis):
        amps, evan = ideal_source_amplitudes(basis, PULSE, basis.depth / 3, [OMEGA_0, 10.0], 5)
        assert abs(amps[1, 0]) < 1e-14
        assert np.all(amps[:, 1] == 0) and np.all(evan[:, 1] == 0)
        assert evan.shape == (5, 2)

    def test_evanescent_amplitudes(self, basis):
        _, evan = ideal_source_amplitudes(basis, PULSE, X_O, OMEGA_0, 2)
        l = 41
        mu = np.pi * (l - 0.5) / basis.depth
        b = np.sqrt(mu**2 - basis.wavenumber**2)
        expected = -eigenfunction(basis, l, X_O) / (2 * PULSE.bandwidth * np.sqrt(b)) * np.pi
        assert evan[0, 0] == pytest.approx(expected, rel=1e-13)

    def test_source_outside_waveguide(self, basis):
        with pytest.raises(ConfigurationError):
            ideal_source_amplitudes(basis, PULSE, 0.0, OMEGA_0)

    def test_range_precondition(self, basis):
        with pytest.raises(ConfigurationError):
            ideal_array_data(basis, PULSE, X_O, default_array(2.0), self.omega)
        ideal_array_data(basis, PULSE, X_O, default_array(2.0), self.omega, min_range=1.0)

    def test_flux_independent_of_range(self, basis):
        flux = []
        for z in (10.0, 55.0, 300.0):
            data, field_ = ideal_array_data(basis, PULSE, X_O, full_aperture_array(20.0, z), self.omega)
            flux.append(np.sum(np.abs(to_projected(data, basis)) ** 2 * basis.axial_wavenumbers[:, None]))
        np.testing.assert_allclose(flux, flux[0], rtol=1e-12)

    def test_receiver_field_matches_mode_sum(self, basis):
        arr = default_array(60.0)
        data, field_ = ideal_array_data(basis, PULSE, X_O, arr, self.omega)
        beta = basis.axial_wavenumbers
        xr, m = 7.5, 4
        r = int(np.argmin(np.abs(arr.receivers - xr)))
        # linear dispersion around the basis frequency
        b = beta + basis.group_slowness * (self.omega[m] - OMEGA_0)
        expected = np.sum(data.amplitudes[:, m] * np.exp(1j * b * 60.0)
                          * eigenfunction(basis, basis.indices, xr) / np.sqrt(beta))
        assert field_.values[m, r] == pytest.approx(expected, rel=1e-12)


class TestModeDecomposition:
    omega = OMEGA_0 + np.linspace(-0.3, 0.3, 9)

    def test_full_aperture_round_trip(self, basis):
        arr = full_aperture_array(basis.depth, 80.0)
        data, field_ = ideal_array_data(basis, PULSE, X_O, arr, self.omega)
        dec = mode_decompose(field_, basis, arr)
        assert dec.form == "projected" and dec.provenance == "decomposed"
        rec = to_amplitudes(dec, basis)
        err = np.linalg.norm(rec - data.amplitudes) / np.linalg.norm(data.amplitudes)
        assert err < 1e-3

    def test_single_mode(self, basis):
        arr = full_aperture_array(basis.depth, 30.0)
        values = mode_matrix(basis, arr.receivers)[0][None, :]
        field_ = ReceiverField(np.array([OMEGA_0]), arr.receivers, values, 30.0)
        p = mode_decompose(field_, basis, arr).amplitudes[:, 0]
        assert abs(p[0] - 1) < 1e-3
        assert np.max(np.abs(p[1:])) < 1e-3

    def test_partial_aperture_reports_coverage(self, basis):
        arr = ArrayGeometry(40.0, np.arange(0.5, 10.01, 0.5))
        _, field_ = ideal_array_data(basis, PULSE, X_O, arr, self.omega)
        dec = mode_decompose(field_, basis, arr)
        assert dec.metadata["coverage"] == pytest.approx(9.5 / 20)
        assert dec.metadata["aperture"] == [0.5, 10.0]

    def test_needs_two_receivers(self, basis):
        arr = ArrayGeometry(40.0, np.array([3.0]))
        field_ = ReceiverField(np.array([OMEGA_0]), arr.receivers, np.ones((1, 1)), 40.0)
        with pytest.raises(ConfigurationError):
            mode_decompose(field_, basis, arr)


class TestSurrogate:
    def test_zero_range_is_ideal(self, basis, boundary_stats, grid):
        arr = default_array(0.0)
        data = surrogate_random_data(basis, PULSE, X_O, arr, boundary_stats, grid, seed=3)
        ideal, _ = ideal_source_amplitudes(basis, PULSE, X_O, grid)
        np.testing.assert_allclose(data.amplitudes, ideal, rtol=1e-12, atol=1e-15)

    def test_reproducible(self, basis, boundary_stats, grid):
        arr = default_array(100.0)
        a = surrogate_random_data(basis, PULSE, X_O, arr, boundary_stats, grid, seed=11, realization=2)
        b = surrogate_random_data(basis, PULSE, X_O, arr, boundary_stats, grid, seed=11, realization=2)
        c = surrogate_random_data(basis, PULSE, X_O, arr, boundary_stats, grid, seed=11, realization=3)
        np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
        assert not np.allclose(a.amplitudes, c.amplitudes)
        assert a.metadata["cross_mode"] == "independent"
        assert a.provenance == "surrogate(11)"

    def test_coarse_grid_rejected(self, basis, boundary_stats):
        coarse = frequency_grid(PULSE, n=33)
        arr = default_array(100.0)
        with pytest.raises(ConfigurationError, match="decoherence"):
            surrogate_random_data(basis, PULSE, X_O, arr, boundary_stats, coarse, seed=0)
        with pytest.warns(UserWarning, match="decoherence"):
            surrogate_random_data(basis, PULSE, X_O, arr, boundary_stats, coarse, seed=0,
                                  allow_coarse=True)

    def test_non_uniform_grid_rejected(self, basis, boundary_stats):
        bad = OMEGA_0 + np.array([0.0, 1e-5, 3e-5])
        with pytest.raises(ConfigurationError):
            surrogate_random_data(basis, PULSE, X_O, default_array(50.0), boundary_stats, bad, seed=0)

    def test_inconsistent_moments(self, basis, boundary_stats, grid):
        # no coherent decay but strong power exchange: some modes lose power faster than their mean
        broken = dataclasses.replace(boundary_stats, inv_smfp=np.zeros(40), inv_phase=np.zeros(40))
        with pytest.raises(ModelInconsistencyError):
            surrogate_random_data(basis, PULSE, X_O, default_array(100.0), broken, grid, seed=0)

    def test_mean_is_centred(self, basis, medium_stats):
        omega_c = decoherence_frequency(medium_stats)
        omega = OMEGA_0 + omega_c / 2 * np.arange(-3, 4)
        samples = np.stack([
            surrogate_random_data(basis, PULSE, X_O, default_array(20.0), medium_stats, omega,
                                  seed=1, realization=r).amplitudes
            for r in range(400)])
        m = mean_amplitude(medium_stats, PULSE, X_O, omega, 20.0)
        se = samples.std(axis=0) / np.sqrt(samples.shape[0])
        assert np.all(np.abs(samples.mean(axis=0) - m) < 5 * np.maximum(se, 1e-300) + 1e-12)


class TestAr1:
    def test_lag_correlation_at_decoherence_frequency(self):
        rng = np.random.default_rng(5)
        rho = np.exp(-0.5)
        xi = ar1_process(rng, (2000, 9), rho)
        lag2 = np.mean(xi[:, 4:] * np.conj(xi[:, 2:-2]))
        assert abs(lag2.real / np.exp(-1) - 1) < 0.1
        assert np.mean(np.abs(xi) ** 2) == pytest.approx(1.0, rel=0.05)

    def test_stationary_from_first_sample(self):
        rng = np.random.default_rng(6)
        xi = ar1_process(rng, (20000, 3), 0.9)
        np.testing.assert_allclose(np.mean(np.abs(xi) ** 2, axis=0), 1.0, rtol=0.03)
        assert abs(np.mean(xi[:, 0] ** 2)) < 0.03


def test_csv_writers(tmp_path, basis):
    omega = OMEGA_0 + np.array([-0.1, 0.0, 0.1])
    data, field_ = ideal_array_data(basis, PULSE, X_O, default_array(50.0), omega)
    write_modal_csv(data, tmp_path / "m.csv")
    write_receiver_csv(field_, tmp_path / "r.csv")
    with open(tmp_path / "m.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["omega", "j", "re", "im"]
    assert len(rows) == 1 + 40 * 3
    assert complex(float(rows[1][2]), float(rows[1][3])) == data.amplitudes[0, 0]
    with open(tmp_path / "r.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["omega", "x_r", "re", "im"]
    assert len(rows) == 1 + 39 * 3
    assert receiver_field(data, basis, default_array(50.0)).values.shape == (3, 39)
