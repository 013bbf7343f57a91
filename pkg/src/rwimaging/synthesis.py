"""Array data: ideal-waveguide amplitudes, moment-matched random surrogates and
mode decomposition of receiver-domain fields.

Two representations of the data at the array range are used.

``form="amplitude"``
    The random mode amplitudes ``a_j(omega)`` of the field representation
    ``p(omega, x, z_A) = sum_j a_j exp(i beta_j z_A) phi_j(x) / sqrt(beta_j)``.
    For ideal data they equal the source amplitudes.
``form="projected"``
    The projections ``p_j(omega) = int p(omega, x, z_A) phi_j(x) dx`` obtained
    from receiver data.

Amplitude factors ``1/sqrt(beta_j)`` are taken at the basis frequency; the
propagation phase uses the dispersion model chosen by the caller.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigurationError, ModelInconsistencyError
from .pulse import Pulse, pulse_spectrum
from .spectral import ModeBasis, axial_wavenumbers, eigenfunction, mode_matrix
from .stochastic import ModeStatistics, mean_amplitude, second_moment

MIN_ARRAY_RANGE = 5.0
MAX_RECEIVER_SPACING = 0.5
NEGATIVE_VARIANCE_TOL = 1e-8
VARIANCE_FLOOR = 1e-12
FORMS = ("amplitude", "projected")


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Vertical receiver array at range ``range_z``."""

    range_z: float
    receivers: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.receivers, dtype=float)
        if r.ndim != 1 or r.size < 1:
            raise ConfigurationError("receivers must be a non-empty 1-D list")
        if np.any(np.diff(r) <= 0):
            raise ConfigurationError("receiver positions must be strictly increasing")
        object.__setattr__(self, "receivers", r)
        if r.size > 1 and np.max(np.diff(r)) > MAX_RECEIVER_SPACING + 1e-12:
            warnings.warn(f"receiver spacing {np.max(np.diff(r)):.3g} exceeds half a wavelength",
                          stacklevel=3)

    @property
    def extent(self) -> tuple[float, float]:
        return float(self.receivers[0]), float(self.receivers[-1])

    def coverage(self, depth: float) -> float:
        lo, hi = self.extent
        return (hi - lo) / depth


def default_array(range_z: float, count: int = 39, spacing: float = 0.5) -> ArrayGeometry:
    """``count`` receivers at ``r * spacing``, r = 1..count."""
    return ArrayGeometry(range_z, spacing * np.arange(1, count + 1))


def full_aperture_array(depth: float, range_z: float, spacing: float = 0.5) -> ArrayGeometry:
    """Receivers covering ``[0, D]`` including both ends."""
    n = int(round(depth / spacing))
    return ArrayGeometry(range_z, np.linspace(0.0, depth, n + 1))


@dataclass(frozen=True, eq=False)
class ModalData:
    """Mode-space data on a frequency grid; ``amplitudes`` has shape (N, M)."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    range_z: float
    provenance: str
    form: str = "amplitude"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        if f.ndim != 1 or f.size < 1:
            raise ConfigurationError("frequency grid must be a non-empty 1-D array")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise ConfigurationError("frequency grid must be strictly increasing")
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 2 or a.shape[1] != f.size:
            raise ConfigurationError(f"amplitudes must have shape (N, {f.size}), got {a.shape}")
        if self.form not in FORMS:
            raise ConfigurationError(f"form must be one of {FORMS}")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "amplitudes", a)

    @property
    def mode_count(self) -> int:
        return self.amplitudes.shape[0]

    def scaled(self, factor: complex) -> "ModalData":
        return ModalData(self.frequencies, factor * self.amplitudes, self.range_z,
                         self.provenance, self.form, dict(self.metadata))


@dataclass(frozen=True, eq=False)
class ReceiverField:
    """Field ``p(omega, x_r, z_A)``; ``values`` has shape (M, R)."""

    frequencies: np.ndarray
    receivers: np.ndarray
    values: np.ndarray
    range_z: float


def _propagator(basis: ModeBasis, omega, range_z, dispersion):
    return np.exp(1j * axial_wavenumbers(basis, omega, dispersion) * range_z)


def to_projected(data: ModalData, basis: ModeBasis, dispersion: str = "linear") -> np.ndarray:
    """``p_j(omega)`` for either data form; shape (N, M)."""
    if data.form == "projected":
        return data.amplitudes
    prop = _propagator(basis, data.frequencies, data.range_z, dispersion)
    return data.amplitudes * prop / np.sqrt(basis.axial_wavenumbers)[:, None]


def to_amplitudes(data: ModalData, basis: ModeBasis, dispersion: str = "linear") -> np.ndarray:
    """Inverse of :func:`to_projected`; shape (N, M)."""
    if data.form == "amplitude":
        return data.amplitudes
    prop = _propagator(basis, data.frequencies, data.range_z, dispersion)
    return data.amplitudes / prop * np.sqrt(basis.axial_wavenumbers)[:, None]


def _check_source(basis: ModeBasis, x_o: float):
    if not 0 < x_o < basis.depth:
        raise ConfigurationError(f"source cross-range {x_o} must lie in (0, {basis.depth})")


def ideal_source_amplitudes(basis: ModeBasis, pulse: Pulse, x_o: float, omega,
                            n_evanescent: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Source amplitudes of propagating modes and of the first evanescent modes.

    Returns arrays of shape (N, M) and (n_evanescent, M).
    """
    _check_source(basis, x_o)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    spec = pulse_spectrum(pulse, omega) / pulse.bandwidth
    phi = eigenfunction(basis, basis.indices, x_o)
    prop = (phi / (2j * np.sqrt(basis.axial_wavenumbers)))[:, None] * spec[None, :]
    n = basis.mode_count
    l = np.arange(n + 1, n + n_evanescent + 1)
    mu = np.pi * (l - 0.5) / basis.depth
    beta_e = np.sqrt(mu**2 - basis.wavenumber**2)
    phi_e = eigenfunction(basis, l, x_o) if l.size else np.zeros(0)
    evan = (-phi_e / (2 * np.sqrt(beta_e)))[:, None] * spec[None, :]
    return prop, evan


def receiver_field(data: ModalData, basis: ModeBasis, array: ArrayGeometry,
                   dispersion: str = "linear") -> ReceiverField:
    """Sum the modes at the receivers."""
    p_j = to_projected(data, basis, dispersion)
    values = p_j.T @ mode_matrix(basis, array.receivers)
    return ReceiverField(data.frequencies, array.receivers, values, data.range_z)


def ideal_array_data(basis: ModeBasis, pulse: Pulse, x_o: float, array: ArrayGeometry,
                     freq_grid, dispersion: str = "linear",
                     min_range: float = MIN_ARRAY_RANGE) -> tuple[ModalData, ReceiverField]:
    """Noise-free data of a point source recorded at the array range."""
    if array.range_z < min_range:
        raise ConfigurationError(
            f"array range {array.range_z} is below {min_range}; evanescent modes are not negligible")
    amps, _ = ideal_source_amplitudes(basis, pulse, x_o, freq_grid)
    data = ModalData(freq_grid, amps, array.range_z, "ideal",
                     metadata={"x_o": x_o, "dispersion": dispersion})
    return data, receiver_field(data, basis, array, dispersion)


def mode_decompose(field_: ReceiverField, basis: ModeBasis, array: ArrayGeometry) -> ModalData:
    """Project receiver data on the modes with trapezoid weights over the array."""
    x = array.receivers
    if x.size < 2:
        raise ConfigurationError("mode decomposition needs at least two receivers")
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    proj = (mode_matrix(basis, x) * w) @ field_.values.T
    meta = {"aperture": list(array.extent), "coverage": array.coverage(basis.depth)}
    return ModalData(field_.frequencies, proj, field_.range_z, "decomposed", "projected", meta)


def decoherence_frequency(stats: ModeStatistics) -> float:
    """``eps^2 omega_o``: frequency lag over which fluctuations decorrelate."""
    return stats.model.epsilon**2 * stats.basis.frequency


def ar1_process(rng: np.random.Generator, shape: tuple[int, int], rho: float) -> np.ndarray:
    """Unit-variance circular complex Gaussian AR(1) sequences along the last axis.

    Stationary from the first sample, with lag-``m`` correlation ``rho**m``.
    """
    eta = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    c = np.sqrt(1.0 - rho**2)
    zi = (1.0 - c) * eta[:, :1]
    out, _ = lfilter([c], [1.0, -rho], eta, axis=-1, zi=zi)
    return out


def surrogate_random_data(basis: ModeBasis, pulse: Pulse, x_o: float, array: ArrayGeometry,
                          stats: ModeStatistics, freq_grid, seed: int, realization: int = 0,
                          allow_coarse: bool = False) -> ModalData:
    """One realization of random mode amplitudes with the prescribed first two moments.

    Fluctuations are independent across modes and follow an exponential
    correlation in frequency with scale :func:`decoherence_frequency`.
    """
    _check_source(basis, x_o)
    freq_grid = np.asarray(freq_grid, dtype=float)
    omega_c = decoherence_frequency(stats)
    step = float(np.diff(freq_grid).max()) if freq_grid.size > 1 else 0.0
    if freq_grid.size > 1 and not np.allclose(np.diff(freq_grid), step, rtol=1e-9, atol=0):
        raise ConfigurationError("surrogate data needs a uniform frequency grid")
    if step > omega_c / 2 * (1 + 1e-9):
        msg = f"frequency step {step:.3g} does not resolve the decoherence scale {omega_c:.3g}"
        if not allow_coarse:
            raise ConfigurationError(msg)
        warnings.warn(msg, stacklevel=2)

    z = array.range_z
    mean = mean_amplitude(stats, pulse, x_o, freq_grid, z)
    power = second_moment(stats, pulse, x_o, freq_grid, z)
    var = power - np.abs(mean) ** 2
    rel = var / np.where(power > 0, power, 1.0)
    worst = np.min(rel)
    if worst < -NEGATIVE_VARIANCE_TOL:
        raise ModelInconsistencyError(f"second moment below squared mean (relative {worst:.3g})")
    # differences at rounding level would otherwise turn into sqrt-sized noise
    var = np.where(np.abs(rel) <= VARIANCE_FLOOR, 0.0, var)
    sigma = np.sqrt(np.clip(var, 0.0, None))

    rng = np.random.default_rng([int(seed), int(realization)])
    rho = float(np.exp(-step / omega_c)) if step > 0 else 1.0
    xi = ar1_process(rng, mean.shape, rho)
    meta = {"seed": int(seed), "realization": int(realization), "x_o": x_o,
            "decoherence_frequency": omega_c, "cross_mode": "independent"}
    return ModalData(freq_grid, mean + sigma * xi, z, f"surrogate({seed})", metadata=meta)


def write_modal_csv(data: ModalData, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("omega", "j", "re", "im"))
        for j, row in enumerate(data.amplitudes, start=1):
            for om, v in zip(data.frequencies, row):
                w.writerow([repr(float(om)), j, repr(float(v.real)), repr(float(v.imag))])


def write_receiver_csv(field_: ReceiverField, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("omega", "x_r", "re", "im"))
        for om, row in zip(field_.frequencies, field_.values):
            for x, v in zip(field_.receivers, row):
                w.writerow([repr(float(om)), repr(float(x)), repr(float(v.real)), repr(float(v.imag))])
