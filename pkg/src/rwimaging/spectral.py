"""Mode basis of the ideal waveguide.

Units are fixed so that the background speed and the central wavelength are
both one: lengths are in wavelengths, the central angular frequency is
``2*pi`` and so is the central wavenumber.

The cross-section is ``[0, D]`` with a Neumann (rigid) bottom at ``x = 0`` and
a pressure-release top at ``x = D``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    NarrowbandError,
    NoPropagatingModesError,
    StandingWaveError,
)

OMEGA_0 = 2.0 * np.pi
K_0 = 2.0 * np.pi

_STANDING_WAVE_TOL = 1e-12


@dataclass(frozen=True)
class WaveguideGeometry:
    depth: float
    background_speed: float = 1.0

    def __post_init__(self):
        if not self.depth > 0:
            raise ConfigurationError(f"depth must be positive, got {self.depth}")
        if not self.background_speed > 0:
            raise ConfigurationError(
                f"background_speed must be positive, got {self.background_speed}")


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """Propagating modes at one angular frequency.

    ``transverse_wavenumbers[j-1]`` and ``axial_wavenumbers[j-1]`` hold the
    values for mode ``j`` (mode indices are 1-based throughout the package).
    """

    geometry: WaveguideGeometry
    frequency: float
    wavenumber: float
    mode_count: int
    transverse_wavenumbers: np.ndarray
    axial_wavenumbers: np.ndarray

    @property
    def depth(self) -> float:
        return self.geometry.depth

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.mode_count + 1)

    @property
    def group_slowness(self) -> np.ndarray:
        return self.wavenumber / (self.geometry.background_speed * self.axial_wavenumbers)


def transverse_wavenumber(depth: float, j) -> np.ndarray:
    """``pi (j - 1/2) / D`` for any (also evanescent) mode index."""
    return np.pi * (np.asarray(j, dtype=float) - 0.5) / depth


def mode_count(geometry: WaveguideGeometry, omega: float) -> int:
    """Number of propagating modes, ``floor(k D / pi + 1/2)``.

    Raises
    ------
    NoPropagatingModesError
        If no mode propagates at this frequency.
    """
    if not omega > 0:
        raise ConfigurationError(f"omega must be positive, got {omega}")
    k = omega / geometry.background_speed
    n = int(np.floor(k * geometry.depth / np.pi + 0.5))
    if n < 1:
        raise NoPropagatingModesError(
            f"no propagating modes for depth={geometry.depth}, omega={omega}")
    return n


def build_mode_basis(geometry: WaveguideGeometry, omega: float = OMEGA_0) -> ModeBasis:
    n = mode_count(geometry, omega)
    k = omega / geometry.background_speed
    mu = transverse_wavenumber(geometry.depth, np.arange(1, n + 1))
    lam = k**2 - mu**2
    if abs(lam[-1]) < (_STANDING_WAVE_TOL * k) ** 2:
        raise StandingWaveError(
            f"mode {n} is at cutoff (beta_N ~ 0) for depth={geometry.depth}, omega={omega}")
    return ModeBasis(
        geometry=geometry,
        frequency=float(omega),
        wavenumber=float(k),
        mode_count=n,
        transverse_wavenumbers=mu,
        axial_wavenumbers=np.sqrt(lam),
    )


def check_narrowband(geometry: WaveguideGeometry, omega_lo: float, omega_hi: float) -> int:
    """Return the mode count if it is the same at both band edges.

    ``N(omega)`` is monotone in ``omega`` so checking the edges is enough.
    """
    n_lo = mode_count(geometry, omega_lo)
    n_hi = mode_count(geometry, omega_hi)
    if n_lo != n_hi:
        raise NarrowbandError(
            f"mode count varies across [{omega_lo:.6g}, {omega_hi:.6g}]: {n_lo} -> {n_hi}")
    return n_lo


def eigenfunction(basis: ModeBasis | float, j, x) -> np.ndarray:
    """``sqrt(2/D) cos(pi (j - 1/2) x / D)``, broadcasting over ``j`` and ``x``.

    ``basis`` may also be a bare depth. Indices above the mode count are
    allowed (evanescent modes).
    """
    depth = basis if isinstance(basis, (int, float)) else basis.depth
    x = np.asarray(x, dtype=float)
    j = np.asarray(j)
    if np.any(j < 1):
        raise ConfigurationError("mode indices start at 1")
    tol = 1e-12 * depth
    if np.any(x < -tol) or np.any(x > depth + tol):
        raise ConfigurationError(f"cross-range outside [0, {depth}]")
    return np.sqrt(2.0 / depth) * np.cos(transverse_wavenumber(depth, j) * x)


def mode_matrix(basis: ModeBasis, x) -> np.ndarray:
    """Eigenfunctions of all propagating modes sampled at ``x``; shape (N, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return eigenfunction(basis, basis.indices[:, None], x[None, :])


def group_slowness(basis: ModeBasis, j=None) -> np.ndarray:
    """``d beta_j / d omega = k / (c beta_j)``; all modes if ``j`` is None."""
    s = basis.group_slowness
    if j is None:
        return s
    j = np.asarray(j)
    if np.any(j < 1) or np.any(j > basis.mode_count):
        raise ConfigurationError(f"mode index out of range 1..{basis.mode_count}")
    return s[j - 1]


def exact_axial_wavenumbers(geometry: WaveguideGeometry, n: int, omega) -> np.ndarray:
    """``beta_j(omega)`` for j = 1..n without linearization; NaN past cutoff."""
    omega = np.asarray(omega, dtype=float)
    k = omega / geometry.background_speed
    mu = transverse_wavenumber(geometry.depth, np.arange(1, n + 1))
    lam = k[..., None] ** 2 - mu**2
    with np.errstate(invalid="ignore"):
        return np.where(lam > 0, np.sqrt(np.abs(lam)), np.nan)


def axial_wavenumbers(basis: ModeBasis, omega, dispersion: str = "linear") -> np.ndarray:
    """Axial wavenumbers at frequencies ``omega``; shape (N, len(omega)).

    ``"linear"`` expands about the basis frequency to first order, which keeps
    every mode propagating across the band. ``"exact"`` requires the band to
    keep the mode count fixed.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if dispersion == "linear":
        d = omega - basis.frequency
        return basis.axial_wavenumbers[:, None] + basis.group_slowness[:, None] * d[None, :]
    if dispersion == "exact":
        check_narrowband(basis.geometry, omega.min(), omega.max())
        beta = exact_axial_wavenumbers(basis.geometry, basis.mode_count, omega)
        return beta.T
    raise ConfigurationError(f"unknown dispersion model {dispersion!r}")


def ideal_green(basis: ModeBasis, x_r, x, range_gap) -> np.ndarray:
    """Outgoing Green's function of the ideal waveguide at the basis frequency.

    Sum over propagating modes of ``phi_j(x_r) phi_j(x) exp(i beta_j L) / (2 i beta_j)``.
    """
    x_r, x, gap = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (x_r, x, range_gap)))
    beta = basis.axial_wavenumbers.reshape((-1,) + (1,) * x.ndim)
    j = basis.indices.reshape(beta.shape)
    terms = (eigenfunction(basis, j, x_r[None]) * eigenfunction(basis, j, x[None])
             * np.exp(1j * beta * gap[None]) / (2j * beta))
    return terms.sum(axis=0)
