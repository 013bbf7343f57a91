"""Coherent imaging with mode weights.

The image at cross-range ``x`` and range offset ``z`` from the array-facing
search range is

    I(x, z; w) = int domega/(2 pi) sum_j w_j / (2 i beta_j) conj(p_j(omega))
                 phi_j(x) exp(i beta_j(omega) (z_A - z)),

evaluated by the trapezoid rule in frequency. Since it is linear in ``w`` we
store, for each mode, its range factor ``G_j(z)`` and evaluate
``I = sum_j w_j G_j(z) phi_j(x)`` as a matrix product.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ZeroImageError
from .pulse import Pulse
from .quadrature import composite_gauss_legendre
from .spectral import (
    ModeBasis,
    axial_wavenumbers,
    eigenfunction,
    exact_axial_wavenumbers,
    mode_matrix,
)
from .stochastic import ModeStatistics, transfer_matrix
from .synthesis import ModalData

NULL_TOL = 1e-10
NORM_TOL = 1e-12


# -- weights -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeightVector:
    """Unit-norm complex mode weights."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1:
            raise ConfigurationError("weights must be one-dimensional")
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise ConfigurationError("weights must have unit Euclidean norm; use WeightVector.normalized")
        object.__setattr__(self, "values", v)

    @classmethod
    def normalized(cls, values) -> "WeightVector":
        v = np.asarray(values, dtype=complex)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ConfigurationError("cannot normalize zero weights")
        return cls(v / norm)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.values)

    def __len__(self):
        return self.values.size


def active_modes(basis: ModeBasis, x_o: float) -> np.ndarray:
    """Mask of modes that do not vanish at ``x_o``."""
    if not 0 < x_o < basis.depth:
        raise ConfigurationError(f"x_o must lie in (0, {basis.depth})")
    phi = eigenfunction(basis, basis.indices, x_o)
    mask = np.abs(phi) > NULL_TOL * np.sqrt(2.0 / basis.depth)
    assert mask.any(), "the first mode has no interior null"
    return mask


def _masked(basis, x_o, values) -> WeightVector:
    return WeightVector.normalized(np.where(active_modes(basis, x_o), values, 0.0))


def uniform_weights(n: int) -> WeightVector:
    return WeightVector(np.full(n, 1 / np.sqrt(n), dtype=complex))


def ideal_optimal_weights(basis: ModeBasis, x_o: float) -> WeightVector:
    """``w_j`` proportional to ``beta_j`` on the modes active at ``x_o``."""
    return _masked(basis, x_o, basis.axial_wavenumbers)


def crossrange_weights(basis: ModeBasis, x_o: float) -> WeightVector:
    return _masked(basis, x_o, basis.axial_wavenumbers**2)


def range_weights(basis: ModeBasis, x_o: float) -> WeightVector:
    mask = active_modes(basis, x_o)
    phi2 = eigenfunction(basis, basis.indices, x_o) ** 2
    vals = np.zeros(basis.mode_count)
    vals[mask] = basis.axial_wavenumbers[mask] / phi2[mask]
    return WeightVector.normalized(vals)


def random_theoretical_magnitudes(stats: ModeStatistics, x_o: float, range_z: float) -> np.ndarray:
    """Unnormalized nonnegative weights that balance coherent and total mode power."""
    basis = stats.basis
    mask = active_modes(basis, x_o)
    phi2 = eigenfunction(basis, basis.indices, x_o) ** 2
    denom = transfer_matrix(stats, range_z) @ (phi2 / basis.axial_wavenumbers)
    vals = np.zeros(basis.mode_count)
    vals[mask] = phi2[mask] * np.exp(-range_z * stats.inv_smfp[mask]) / denom[mask]
    return vals / np.linalg.norm(vals)


def random_theoretical_weights(stats: ModeStatistics, x_o: float, range_z: float) -> WeightVector:
    """Theoretical weights with phases compensating the net phase drift."""
    mag = random_theoretical_magnitudes(stats, x_o, range_z)
    phase = np.exp(1j * range_z * np.nan_to_num(stats.inv_phase))
    return WeightVector.normalized(mag * phase)


def cosine_similarity(a, b) -> float:
    a = np.abs(np.asarray(getattr(a, "values", a)))
    b = np.abs(np.asarray(getattr(b, "values", b)))
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


# -- mode pulses ---------------------------------------------------------------------

def mode_pulse(basis: ModeBasis, pulse: Pulse, j: int, range_offset, exact: bool = False) -> np.ndarray:
    """Range-compressed waveform of mode ``j``.

    The default narrowband form is ``exp(-i beta_j z) f(beta_j' B z)``; with
    ``exact=True`` the frequency integral is done by quadrature with the exact
    dispersion relation (NaN where the mode is cut off inside the band).
    """
    if not 1 <= j <= basis.mode_count:
        raise ConfigurationError(f"mode index must be in 1..{basis.mode_count}")
    z = np.asarray(range_offset, dtype=float)
    if not exact:
        b = basis.axial_wavenumbers[j - 1]
        s = basis.group_slowness[j - 1]
        return np.exp(-1j * b * z) * pulse.envelope(s * pulse.bandwidth * z)
    h_max = np.pi if pulse.shape == "sinc" else 9.0
    h, w = composite_gauss_legendre(-h_max, h_max, 0.25)
    omega = pulse.center_freq + pulse.bandwidth * h
    beta = exact_axial_wavenumbers(basis.geometry, j, omega)[:, j - 1]
    kern = (w * pulse.spectrum(h))[:, None] * np.exp(-1j * beta[:, None] * z.ravel()[None, :])
    return (kern.sum(axis=0) / (2 * np.pi)).reshape(z.shape)


# -- image evaluation ----------------------------------------------------------------

@dataclass(frozen=True)
class ImageSpec:
    """Search grid: cross-range over ``[x_min, x_max]``, range offsets over ``[-z_half, z_half]``."""

    x_step: float = 0.125
    z_step: float = 0.125
    z_half: float = 12.0
    x_min: float = 0.0
    x_max: float | None = None

    def __post_init__(self):
        if not (0 < self.x_step <= 0.125 and 0 < self.z_step <= 0.125):
            raise ConfigurationError("image grid steps must be positive and at most 1/8")
        if not self.z_half > 0:
            raise ConfigurationError("z_half must be positive")

    def axes(self, depth: float) -> tuple[np.ndarray, np.ndarray]:
        hi = depth if self.x_max is None else self.x_max
        if not 0 <= self.x_min < hi <= depth:
            raise ConfigurationError("cross-range window must lie inside [0, D]")
        nx = int(round((hi - self.x_min) / self.x_step))
        nz = int(round(self.z_half / self.z_step))
        x = np.linspace(self.x_min, self.x_min + nx * self.x_step, nx + 1)
        z = self.z_step * np.arange(-nz, nz + 1)
        return x, z


@dataclass(frozen=True)
class Window:
    """Averaging window of the local figure of merit, full widths.

    ``average="modulus"`` averages ``|I|``; ``"complex"`` averages ``I`` itself,
    which cancels the range carrier once the window spans a wavelength.
    """

    range_width: float = 1.0
    crossrange_width: float = 1.0
    average: str = "modulus"

    def __post_init__(self):
        if self.range_width < 0 or self.crossrange_width < 0:
            raise ConfigurationError("window widths must be non-negative")
        if self.average not in ("modulus", "complex"):
            raise ConfigurationError("window average must be 'modulus' or 'complex'")


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """Complex image with ``values[iz, ix]``."""

    x: np.ndarray
    z: np.ndarray
    values: np.ndarray

    @property
    def peak_index(self) -> tuple[int, int]:
        # flattened argmax of [iz, ix]: lowest range index wins ties, then cross-range
        iz, ix = np.unravel_index(np.argmax(np.abs(self.values)), self.values.shape)
        return int(iz), int(ix)

    @property
    def peak_location(self) -> tuple[float, float]:
        iz, ix = self.peak_index
        return float(self.x[ix]), float(self.z[iz])

    @property
    def peak_value(self) -> complex:
        return complex(self.values[self.peak_index])

    def peak_offset(self, x_o: float, z_o: float = 0.0) -> float:
        x, z = self.peak_location
        return float(np.hypot(x - x_o, z - z_o))


class ImageBuilder:
    """Precomputed per-mode factors of the image for fixed data and grid."""

    def __init__(self, data: ModalData, basis: ModeBasis, spec: ImageSpec = ImageSpec(),
                 dispersion: str = "linear"):
        if data.mode_count != basis.mode_count:
            raise ConfigurationError(
                f"data has {data.mode_count} modes, basis has {basis.mode_count}")
        self.basis = basis
        self.spec = spec
        self.x, self.z = spec.axes(basis.depth)
        self.phi = mode_matrix(basis, self.x)
        self.range_factors = self._range_factors(data, dispersion)
        self.cell = spec.x_step * spec.z_step
        gram_x = self.phi @ self.phi.T
        gram_z = self.range_factors @ self.range_factors.conj().T
        self.gram = gram_x * gram_z * self.cell

    def _range_factors(self, data: ModalData, dispersion: str) -> np.ndarray:
        omega = data.frequencies
        beta0 = self.basis.axial_wavenumbers
        beta = axial_wavenumbers(self.basis, omega, dispersion)
        wq = np.ones(1)
        if omega.size > 1:
            d = np.diff(omega)
            wq = np.zeros(omega.size)
            wq[:-1] += 0.5 * d
            wq[1:] += 0.5 * d
        if data.form == "amplitude":
            coeff = np.conj(data.amplitudes) / (2j * beta0[:, None] ** 1.5)
            shift = np.zeros_like(beta)
        else:
            coeff = np.conj(data.amplitudes) / (2j * beta0[:, None])
            shift = beta * data.range_z
        coeff = coeff * (wq / (2 * np.pi))[None, :]
        out = np.empty((self.basis.mode_count, self.z.size), dtype=complex)
        for j in range(self.basis.mode_count):
            phase = np.exp(1j * (shift[j][:, None] - beta[j][:, None] * self.z[None, :]))
            out[j] = coeff[j] @ phase
        return out

    def _weights(self, weights) -> np.ndarray:
        w = np.asarray(getattr(weights, "values", weights), dtype=complex)
        if w.shape != (self.basis.mode_count,):
            raise ConfigurationError(f"expected {self.basis.mode_count} weights, got {w.shape}")
        return w

    def image(self, weights) -> ImageGrid:
        w = self._weights(weights)
        return ImageGrid(self.x, self.z, (self.range_factors.T * w) @ self.phi)

    def norm2(self, weights) -> float:
        w = self._weights(weights)
        return float(np.real(w @ self.gram @ w.conj()))

    def window_mask(self, peak: tuple[int, int], window: Window) -> tuple[slice, slice]:
        iz, ix = peak
        hz = int(np.floor(0.5 * window.range_width / self.spec.z_step + 1e-9))
        hx = int(np.floor(0.5 * window.crossrange_width / self.spec.x_step + 1e-9))
        return (slice(max(iz - hz, 0), iz + hz + 1), slice(max(ix - hx, 0), ix + hx + 1))


def compute_image(data: ModalData, basis: ModeBasis, weights, spec: ImageSpec = ImageSpec(),
                  dispersion: str = "linear") -> ImageGrid:
    return ImageBuilder(data, basis, spec, dispersion).image(weights)


def _merit(builder: ImageBuilder, weights, window: Window | None) -> float:
    img = builder.image(weights)
    norm2 = builder.norm2(weights)
    if not norm2 > 0:
        raise ZeroImageError("image has zero norm")
    peak = img.peak_index
    if window is None:
        value = img.values[peak]
    else:
        sz, sx = builder.window_mask(peak, window)
        block = img.values[sz, sx]
        value = np.abs(block).mean() if window.average == "modulus" else block.mean()
    return float(abs(value) ** 2 / norm2)


def figure_of_merit(builder: ImageBuilder, weights) -> float:
    """Peak intensity over the squared grid norm of the image."""
    return _merit(builder, weights, None)


def figure_of_merit_local(builder: ImageBuilder, weights, window: Window = Window()) -> float:
    """As :func:`figure_of_merit` with the image averaged over a window at its peak."""
    return _merit(builder, weights, window)


# -- output --------------------------------------------------------------------------

def write_image_csv(img: ImageGrid, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("x", "z", "re", "im", "abs"))
        for iz, z in enumerate(img.z):
            for ix, x in enumerate(img.x):
                v = img.values[iz, ix]
                w.writerow([repr(float(x)), repr(float(z)), repr(float(v.real)),
                            repr(float(v.imag)), repr(float(abs(v)))])


def write_weights_csv(weights: WeightVector, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("j", "magnitude", "phase"))
        for j, (m, p) in enumerate(zip(weights.magnitudes, weights.phases), start=1):
            w.writerow([j, repr(float(m)), repr(float(p))])


def write_trace_json(trace: list[dict], path) -> None:
    with open(path, "w") as fh:
        json.dump(trace, fh, indent=2)
