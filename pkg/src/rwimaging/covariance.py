"""Random perturbation models: covariances, spectral densities and mode projections.

Covariances take dimensionless lags (physical lag divided by the correlation
length). Power spectral densities are the Fourier transforms in that
dimensionless variable, ``R_hat(q) = int R(u) exp(i q u) du``, so the physical
rate formulas carry an explicit factor of the correlation length.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import fft as sfft
from scipy.optimize import brentq

from .errors import ConfigurationError
from .quadrature import composite_gauss_legendre, oscillatory_panel_width
from .spectral import ModeBasis, transverse_wavenumber

KINDS = ("boundary", "medium")
FAMILIES = ("matern72", "gaussian", "tabulated")

TAIL_REL = 1e-12
DCT_PADDING = 8


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Stationary zero-mean perturbation with ``R(0) = epsilon**2``.

    ``kind="boundary"`` perturbs the depth, ``D (1 + nu(z / ell))``;
    ``kind="medium"`` perturbs the squared slowness with an isotropic field
    ``mu(x / ell, z / ell)``. Tabulated covariances (boundary only) are given on
    a uniform grid of dimensionless lags starting at zero.
    """

    kind: str
    family: str
    epsilon: float
    corr_length: float
    lags: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.family not in FAMILIES:
            raise ConfigurationError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.kind == "medium" and self.family != "gaussian":
            raise ConfigurationError("medium perturbations support the isotropic gaussian family only")
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be non-negative")
        if not self.corr_length > 0:
            raise ConfigurationError("corr_length must be positive")
        if self.family == "tabulated":
            if self.lags is None or self.values is None:
                raise ConfigurationError("tabulated covariance needs lags and values")
            lags = np.asarray(self.lags, dtype=float)
            if lags[0] != 0 or np.any(np.abs(np.diff(lags) - (lags[1] - lags[0])) > 1e-9 * lags[-1]):
                raise ConfigurationError("tabulated lags must be uniform and start at 0")
            if not np.isclose(self.values[0], self.epsilon**2, rtol=1e-12):
                raise ConfigurationError("tabulated covariance must satisfy R(0) = epsilon**2")

    @classmethod
    def from_table(cls, kind: str, corr_length: float, lags, values) -> "CovarianceModel":
        values = np.asarray(values, dtype=float)
        return cls(kind, "tabulated", float(np.sqrt(values[0])), corr_length,
                   np.asarray(lags, dtype=float), values)

    def scaled(self, epsilon: float) -> "CovarianceModel":
        """Same shape, different amplitude."""
        if self.family == "tabulated":
            ratio = (epsilon / self.epsilon) ** 2
            return CovarianceModel.from_table(self.kind, self.corr_length, self.lags, self.values * ratio)
        return CovarianceModel(self.kind, self.family, epsilon, self.corr_length)

    @property
    def variance(self) -> float:
        return self.epsilon**2

    @cached_property
    def _table_spectrum(self):
        # trapezoid cosine transform of the even extension, on a zero-padded grid
        du = self.lags[1] - self.lags[0]
        m = DCT_PADDING * len(self.values)
        padded = np.zeros(m)
        padded[: len(self.values)] = self.values
        spec = du * sfft.dct(padded, type=1)
        q = np.pi * np.arange(m) / ((m - 1) * du)
        return q, np.clip(spec, 0.0, None)


def profile(model: CovarianceModel, lag) -> np.ndarray:
    """Covariance normalized to one at zero lag."""
    u = np.abs(np.asarray(lag, dtype=float))
    if model.family == "matern72":
        return (1 + u + 6 * u**2 / 15 + u**3 / 15) * np.exp(-u)
    if model.family == "gaussian":
        return np.exp(-0.5 * u**2)
    return np.interp(u, model.lags, model.values / model.values[0], right=0.0)


def covariance(model: CovarianceModel, lag) -> np.ndarray:
    """``R(lag)``; for a medium model this is the marginal along range."""
    return model.variance * profile(model, lag)


def covariance_2d(model: CovarianceModel, xi, zeta) -> np.ndarray:
    if model.kind != "medium":
        raise ConfigurationError("covariance_2d applies to medium perturbations")
    return model.variance * np.exp(-0.5 * (np.asarray(xi) ** 2 + np.asarray(zeta) ** 2))


def covariance_second_derivative(model: CovarianceModel) -> float:
    """``R''(0)`` with respect to the dimensionless lag."""
    if model.family == "matern72":
        return -model.variance / 5.0
    if model.family == "gaussian":
        return -model.variance
    du = model.lags[1] - model.lags[0]
    return 2.0 * (model.values[1] - model.values[0]) / du**2


def psd(model: CovarianceModel, beta_ell) -> np.ndarray:
    """Power spectral density at dimensionless wavenumber ``beta * ell``."""
    q = np.asarray(beta_ell, dtype=float)
    if model.family == "matern72":
        return 32.0 * model.variance / (5.0 * (1.0 + q**2) ** 4)
    if model.family == "gaussian":
        return model.variance * np.sqrt(2 * np.pi) * np.exp(-0.5 * q**2)
    grid, spec = model._table_spectrum
    return np.interp(np.abs(q), grid, spec, right=0.0)


def tail_lag(model: CovarianceModel, rel: float = TAIL_REL) -> float:
    """Smallest lag beyond which the normalized covariance stays below ``rel``."""
    if model.family == "gaussian":
        return float(np.sqrt(-2.0 * np.log(rel)))
    if model.family == "tabulated":
        above = np.nonzero(np.abs(model.values) >= rel * model.values[0])[0]
        return float(model.lags[min(above[-1] + 1, len(model.lags) - 1)])
    f = lambda u: profile(model, u) - rel
    hi = 1.0
    while f(hi) > 0:
        hi *= 2
    return float(brentq(f, 0.0, hi, xtol=1e-10))


def _profile_integral(model, kernel, u_max, panel):
    u, w = composite_gauss_legendre(0.0, u_max, panel)
    return kernel(u) @ (w * profile(model, u))


def normalized_sine_transform(model: CovarianceModel, q, refine: int = 1) -> np.ndarray:
    """``2 int_0^inf sin(q u) R(u) / R(0) du`` for an array of ``q``."""
    q = np.asarray(q, dtype=float)
    flat = q.ravel()
    qmax = np.max(np.abs(flat)) if flat.size else 0.0
    panel = oscillatory_panel_width(qmax, refine=refine)
    out = _profile_integral(model, lambda u: 2 * np.sin(np.outer(flat, u)), tail_lag(model), panel)
    return out.reshape(q.shape)


def normalized_damped_cosine_transform(model: CovarianceModel, q, decay: float,
                                       refine: int = 1) -> np.ndarray:
    """``int_0^inf exp(-decay u) cos(q u) R(u) / R(0) du`` for an array of ``q``."""
    q = np.asarray(q, dtype=float)
    flat = q.ravel()
    qmax = np.max(np.abs(flat)) if flat.size else 0.0
    u_max = min(tail_lag(model), 40.0 / decay) if decay > 0 else tail_lag(model)
    panel = oscillatory_panel_width(qmax, decay_rate=decay, refine=refine)
    out = _profile_integral(model, lambda u: np.exp(-decay * u) * np.cos(np.outer(flat, u)), u_max, panel)
    return out.reshape(q.shape)


# -- medium: projections of the isotropic field onto mode products ---------------------

def _pair_frequencies(depth, j, l):
    mu_j = transverse_wavenumber(depth, j)
    mu_l = transverse_wavenumber(depth, l)
    return mu_l - mu_j, mu_l + mu_j


def overlap_tensor(depth: float, ell: float, j, l, points_per_wavelength: int = 20) -> np.ndarray:
    """``C_jl`` by tensorized Gauss-Legendre quadrature on ``[0, D]^2``.

    ``C_jl = int int phi_j phi_l(x) phi_j phi_l(x') exp(-(x - x')^2 / (2 ell^2)) dx dx'``.
    Only trustworthy while the node density resolves ``mu_j + mu_l``.
    """
    j, l = np.broadcast_arrays(np.asarray(j), np.asarray(l))
    n_nodes = max(10, int(round(points_per_wavelength * depth / 10.0)) * 10)
    x, w = composite_gauss_legendre(0.0, depth, depth / (n_nodes // 10))
    kernel = np.exp(-0.5 * ((x[:, None] - x[None, :]) / ell) ** 2)
    scale = np.sqrt(2.0 / depth)
    phi_j = scale * np.cos(transverse_wavenumber(depth, j.ravel())[:, None] * x)
    phi_l = scale * np.cos(transverse_wavenumber(depth, l.ravel())[:, None] * x)
    f = phi_j * phi_l * w
    return np.einsum("px,px->p", f @ kernel, f).reshape(j.shape)


def _interval_cos(w, c, s, depth):
    # int_s^D cos(w x + c) dx, stable at w = 0
    half = 0.5 * (depth - s)
    return 2 * half * np.cos(w * 0.5 * (depth + s) + c) * np.sinc(w * half / np.pi)


def overlap_lag(depth: float, ell: float, j, l, refine: int = 1) -> np.ndarray:
    """``C_jl`` via the lag integral ``int K(s) A_jl(s) ds``.

    The autocorrelation ``A_jl(s) = int phi_j phi_l(x) phi_j phi_l(x - s) dx`` is
    evaluated in closed form, which keeps the result accurate for evanescent
    indices whose eigenfunctions oscillate faster than any fixed grid.
    """
    j, l = np.broadcast_arrays(np.asarray(j), np.asarray(l))
    a, b = _pair_frequencies(depth, j.ravel(), l.ravel())
    s_max = min(depth, ell * np.sqrt(-2 * np.log(1e-16)))
    panel = oscillatory_panel_width(np.max(b), scale=ell, refine=refine)
    s, ws = composite_gauss_legendre(0.0, s_max, panel)
    freqs = (a, b)
    acc = np.zeros((a.size, s.size))
    for p in freqs:
        for q in freqs:
            qs = q[:, None] * s[None, :]
            acc += _interval_cos((p - q)[:, None], qs, s[None, :], depth)
            acc += _interval_cos((p + q)[:, None], -qs, s[None, :], depth)
    acc *= 0.5 / depth**2
    kernel = np.exp(-0.5 * (s / ell) ** 2)
    return (2.0 * acc @ (ws * kernel)).reshape(j.shape)


def _box_transform(w, depth):
    # int_0^D exp(i w x) dx
    return depth * np.exp(0.5j * w * depth) * np.sinc(w * depth / (2 * np.pi))


def overlap_spectral(depth: float, ell: float, j, l, refine: int = 1) -> np.ndarray:
    """``C_jl`` as ``(1/2pi) int K_hat(q) |F_jl(q)|^2 dq``.

    ``F_jl`` is the transform of ``phi_j phi_l`` over the cross-section. The
    integrand is nonnegative, so tiny evanescent overlaps come out without
    cancellation, and the cost does not grow with the mode index.
    """
    j, l = np.broadcast_arrays(np.asarray(j), np.asarray(l))
    a, b = _pair_frequencies(depth, j.ravel(), l.ravel())
    q_max = np.sqrt(-2 * np.log(1e-16)) / ell
    panel = min(1.0 / ell, 2 * np.pi / depth) / 2.0 / refine
    q, wq = composite_gauss_legendre(0.0, q_max, panel)
    acc = np.zeros(a.size)
    for start in range(0, a.size, 512):
        sl = slice(start, start + 512)
        qq = q[None, :]
        f = sum(_box_transform(qq + s * p[sl, None], depth) for p in (a, b) for s in (1, -1))
        acc[sl] = (np.abs(f) ** 2) @ (wq * np.exp(-0.5 * (q * ell) ** 2))
    return (acc * np.sqrt(2 * np.pi) * ell / (4 * depth**2) / np.pi).reshape(j.shape)


def medium_overlaps(basis: ModeBasis, model: CovarianceModel, extra_modes: int = 0,
                    points_per_wavelength: int = 20) -> np.ndarray:
    """Overlap matrix ``C[j-1, l-1]`` for j <= N and l <= N + extra_modes.

    The propagating block uses the tensorized rule; evanescent columns use the
    spectral form.
    """
    if model.kind != "medium":
        raise ConfigurationError("overlaps are defined for medium perturbations")
    n, depth, ell = basis.mode_count, basis.depth, model.corr_length
    jj, ll = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    block = overlap_tensor(depth, ell, jj, ll, points_per_wavelength)
    block = 0.5 * (block + block.T)
    if extra_modes <= 0:
        return block
    je, le = np.meshgrid(np.arange(1, n + 1), np.arange(n + 1, n + extra_modes + 1), indexing="ij")
    return np.hstack([block, overlap_spectral(depth, ell, je, le)])


def medium_projected_psd(model: CovarianceModel, basis: ModeBasis, j, l, beta_ell,
                         overlaps: np.ndarray | None = None) -> np.ndarray:
    """PSD of the projected process ``mu_jl``: ``eps^2 sqrt(2 pi) exp(-q^2/2) C_jl``."""
    if model.kind != "medium":
        raise ConfigurationError("projected PSD applies to medium perturbations")
    j, l = np.asarray(j), np.asarray(l)
    if overlaps is None:
        c = overlap_lag(basis.depth, model.corr_length, j, l)
    else:
        c = overlaps[j - 1, l - 1]
    return psd(model, beta_ell) * c
