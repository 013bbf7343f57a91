"""Source pulses and frequency grids.

Transform convention: ``int f(B t) exp(i (omega - omega_o) t) dt = f_hat(h) / B``
with ``h = (omega - omega_o) / B``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .spectral import OMEGA_0

SHAPES = ("gaussian", "sinc")
MAX_RELATIVE_BAND = 0.1
DEFAULT_GRID_CAP = 4096


@dataclass(frozen=True)
class Pulse:
    """Baseband pulse ``f`` modulated onto the carrier ``center_freq``.

    Its spectrum occupies ``[center_freq - pi B, center_freq + pi B]``
    (exactly for ``sinc``, effectively for ``gaussian``).
    """

    bandwidth: float
    shape: str = "sinc"
    center_freq: float = OMEGA_0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ConfigurationError(f"pulse shape must be one of {SHAPES}, got {self.shape!r}")
        if not self.bandwidth > 0:
            raise ConfigurationError("bandwidth must be positive")
        if np.pi * self.bandwidth / self.center_freq > MAX_RELATIVE_BAND:
            raise ConfigurationError(
                f"pi*B/omega_o = {np.pi * self.bandwidth / self.center_freq:.4g} exceeds "
                f"the narrowband limit {MAX_RELATIVE_BAND}")

    @classmethod
    def from_relative_band(cls, relative_band: float, shape: str = "sinc",
                           center_freq: float = OMEGA_0) -> "Pulse":
        """Pulse with ``pi B = relative_band * center_freq``."""
        return cls(relative_band * center_freq / np.pi, shape, center_freq)

    @property
    def relative_band(self) -> float:
        return np.pi * self.bandwidth / self.center_freq

    @property
    def band(self) -> tuple[float, float]:
        half = np.pi * self.bandwidth
        return self.center_freq - half, self.center_freq + half

    def spectrum(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if self.shape == "gaussian":
            return np.sqrt(2 * np.pi) * np.exp(-0.5 * h**2)
        return np.where(np.abs(h) <= np.pi, np.pi, 0.0)

    def envelope(self, u) -> np.ndarray:
        """Baseband pulse ``f(u)``; its transform is :meth:`spectrum`."""
        u = np.asarray(u, dtype=float)
        if self.shape == "gaussian":
            return np.exp(-0.5 * u**2)
        return np.pi * np.sinc(u)


def pulse_spectrum(pulse: Pulse, omega) -> np.ndarray:
    """``f_hat((omega - omega_o) / B)``."""
    return pulse.spectrum((np.asarray(omega, dtype=float) - pulse.center_freq) / pulse.bandwidth)


def frequency_grid(pulse: Pulse, step: float | None = None, n: int | None = None,
                   cap: int = DEFAULT_GRID_CAP) -> np.ndarray:
    """Uniform grid over the pulse band with an odd number of samples.

    Give either a maximum ``step`` or a sample count ``n``. The centre frequency
    is always a grid point.
    """
    lo, hi = pulse.band
    if (step is None) == (n is None):
        raise ConfigurationError("give exactly one of step or n")
    if step is not None:
        if not step > 0:
            raise ConfigurationError("frequency step must be positive")
        n = 2 * int(np.ceil((hi - lo) / (2 * step) - 1e-9)) + 1
    n = int(n)
    if n < 3:
        raise ConfigurationError("frequency grid needs at least 3 samples")
    if n % 2 == 0:
        n += 1
    if n > cap:
        warnings.warn(f"frequency grid capped at {cap} samples (requested {n})", stacklevel=2)
        n = cap - 1 if cap % 2 == 0 else cap
    return np.linspace(lo, hi, n)
