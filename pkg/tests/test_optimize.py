import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwimaging.imaging import (
    ImageBuilder,
    ImageSpec,
    Window,
    cosine_similarity,
    figure_of_merit,
    figure_of_merit_local,
)
from rwimaging.optimize import OptimizerSettings, optimize_weights, optimize_with_builder, project_monotone
from rwimaging.pulse import Pulse, frequency_grid
from rwimaging.spectral import WaveguideGeometry, build_mode_basis
from rwimaging.synthesis import default_array, ideal_array_data

PULSE = Pulse.from_relative_band(0.0625, "sinc")


@pytest.fixture(scope="module")
def small():
    basis = build_mode_basis(WaveguideGeometry(4.0))
    data, _ = ideal_array_data(basis, PULSE, 2.0, default_array(30.0, count=7), frequency_grid(PULSE, n=33))
    return basis, data, ImageBuilder(data, basis, ImageSpec(z_half=3.0))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=30))
def test_projection_is_feasible(values):
    w = project_monotone(values)
    assert np.all(w >= 0)
    assert np.all(np.diff(w) <= 1e-15)
    assert np.linalg.norm(w) == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 5), min_size=1, max_size=30))
def test_projection_fixes_feasible_directions(values):
    v = np.sort(values)[::-1]
    np.testing.assert_allclose(project_monotone(v), v / np.linalg.norm(v), rtol=1e-12)


def test_projection_of_negative_vector():
    np.testing.assert_array_equal(project_monotone([-1.0, -2.0, -3.0]), [1.0, 0.0, 0.0])


def test_projection_pools_violators():
    np.testing.assert_allclose(project_monotone([1.0, 3.0]), [np.sqrt(0.5), np.sqrt(0.5)])


class TestOptimizer:
    def test_trace_is_nondecreasing(self, small):
        basis, _, builder = small
        res = optimize_with_builder(builder, np.ones(basis.mode_count))
        obj = [t["objective"] for t in res.trace]
        assert np.all(np.diff(obj) >= 0)
        assert res.objective == pytest.approx(max(obj))
        assert res.objective >= figure_of_merit_local(builder, np.ones(basis.mode_count))

    def test_result_is_feasible(self, small):
        basis, _, builder = small
        res = optimize_with_builder(builder, np.linspace(0.1, 1.0, basis.mode_count))
        m = res.weights.magnitudes
        assert np.all(np.diff(m) <= 1e-15)
        assert np.linalg.norm(res.weights.values) == pytest.approx(1.0)

    def test_deterministic(self, small):
        basis, data, _ = small
        a = optimize_weights(data, basis, ImageSpec(z_half=3.0))
        b = optimize_weights(data, basis, ImageSpec(z_half=3.0))
        np.testing.assert_array_equal(a.weights.values, b.weights.values)
        assert a.trace == b.trace

    def test_data_scaling_leaves_direction_and_peak(self, small):
        basis, data, builder = small
        scaled = ImageBuilder(data.scaled(3.0 - 4.0j), basis, ImageSpec(z_half=3.0))
        a = optimize_with_builder(builder, np.ones(basis.mode_count))
        b = optimize_with_builder(scaled, np.ones(basis.mode_count))
        assert cosine_similarity(a.weights, b.weights) == pytest.approx(1.0, abs=1e-6)
        assert builder.image(a.weights).peak_location == scaled.image(b.weights).peak_location

    def test_fixed_phases_are_kept(self, small):
        basis, _, builder = small
        phases = np.exp(1j * np.linspace(0, 2, basis.mode_count))
        res = optimize_with_builder(builder, np.ones(basis.mode_count), phases=phases)
        on = res.weights.magnitudes > 0
        np.testing.assert_allclose(res.weights.values[on] / res.weights.magnitudes[on], phases[on],
                                   rtol=1e-12)

    def test_iteration_limit_reports_best_so_far(self, small):
        basis, _, builder = small
        res = optimize_with_builder(builder, np.ones(basis.mode_count),
                                    settings=OptimizerSettings(max_iter=2))
        assert not res.converged
        assert res.iterations == 2
        assert res.objective == max(t["objective"] for t in res.trace)

    def test_recovers_closed_form_maximizer(self, basis):
        data, _ = ideal_array_data(basis, PULSE, basis.depth / 2, default_array(100.0),
                                   frequency_grid(PULSE, n=257))
        builder = ImageBuilder(data, basis)
        res = optimize_with_builder(builder, np.ones(basis.mode_count), Window(0, 0))
        assert res.converged
        assert cosine_similarity(res.weights, basis.axial_wavenumbers) >= 0.99
        assert res.objective == pytest.approx(figure_of_merit(builder, res.weights), rel=1e-12)
