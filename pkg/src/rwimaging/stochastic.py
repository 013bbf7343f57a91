"""Moment engine for random waveguides.

Given a mode basis and a perturbation model this module produces the
scattering mean free paths ``S_j``, the net phase scales ``L_j``, the coupling
generator ``Gamma`` of the mean mode powers, its matrix exponential and the
equipartition distance, and the first two moments of the mode amplitudes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import covariance as cov
from .covariance import CovarianceModel
from .errors import ConfigurationError, DegenerateSpectrumError, DivergenceError
from .pulse import Pulse, pulse_spectrum
from .spectral import ModeBasis, WaveguideGeometry, build_mode_basis, eigenfunction, transverse_wavenumber

EVANESCENT_FACTOR = 9
TAIL_TOLERANCE = 5e-3
DEGENERATE_GAP = 1e-14


@dataclass(frozen=True, eq=False)
class ModeStatistics:
    """Coherence scales and mode coupling at the basis frequency.

    Eigenvalues are sorted in descending order; eigenvector ``k`` is column
    ``k`` of ``eigenvectors``.
    """

    basis: ModeBasis
    model: CovarianceModel
    inv_smfp: np.ndarray
    inv_phase: np.ndarray
    gamma: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def smfp(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / self.inv_smfp

    @property
    def phase_scale(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 1.0 / self.inv_phase

    @property
    def equip_distance(self) -> float:
        return equipartition_distance(self)


def _evanescent_wavenumbers(basis: ModeBasis, n_extra: int):
    l = np.arange(basis.mode_count + 1, basis.mode_count + n_extra + 1)
    mu = transverse_wavenumber(basis.depth, l)
    return l, np.sqrt(mu**2 - basis.wavenumber**2)


def _tail_fraction(terms: np.ndarray) -> np.ndarray:
    """Share of the partial sum carried by the last tenth of the terms (axis 1)."""
    n_last = max(1, int(np.ceil(terms.shape[1] / 10)))
    total = terms.sum(axis=1)
    tail = terms[:, -n_last:].sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(total != 0, np.abs(tail / total), 0.0)


def _check_tail(fraction: np.ndarray, what: str):
    if np.max(fraction) >= TAIL_TOLERANCE:
        raise DivergenceError(
            f"{what}: evanescent sum not converged (last decade carries "
            f"{np.max(fraction):.3%} of the partial sum); raise the cutoff")


# -- boundary perturbations ----------------------------------------------------------

def _boundary_rates(basis: ModeBasis, model: CovarianceModel) -> np.ndarray:
    """Matrix of ``pi^4 ell (j-1/2)^2 (l-1/2)^2 R_hat((b_j - b_l) ell) / (D^4 b_j b_l)``."""
    ell, depth = model.corr_length, basis.depth
    h = basis.indices - 0.5
    beta = basis.axial_wavenumbers
    q = (beta[:, None] - beta[None, :]) * ell
    return (np.pi**4 * ell / depth**4 * np.outer(h**2, h**2) / np.outer(beta, beta)
            * cov.psd(model, q))


def smfp_boundary(basis: ModeBasis, model: CovarianceModel) -> np.ndarray:
    """Inverse scattering mean free paths ``1/S_j`` for a perturbed boundary."""
    if model.kind != "boundary":
        raise ConfigurationError("smfp_boundary needs a boundary model")
    return _boundary_rates(basis, model).sum(axis=1)


def boundary_evanescent_terms(basis: ModeBasis, model: CovarianceModel,
                              n_extra: int | None = None, refine: int = 1) -> np.ndarray:
    """Per-mode terms of the evanescent correction, shape (N, n_extra).

    Column ``m`` collects everything indexed by evanescent mode ``N + 1 + m``:
    the damped cosine transform, its paired constant and the ``R''(0)`` series.
    Evaluating them together makes the column sums decay quickly.
    """
    n = basis.mode_count
    n_extra = EVANESCENT_FACTOR * n if n_extra is None else n_extra
    ell, depth = model.corr_length, basis.depth
    r0, r2 = model.variance, cov.covariance_second_derivative(model)
    hj = basis.indices - 0.5
    beta_j = basis.axial_wavenumbers
    l_idx, beta_l = _evanescent_wavenumbers(basis, n_extra)
    hl = l_idx - 0.5

    pref = 2 * np.pi**4 * hj**2 / (depth**4 * beta_j)
    terms = np.empty((n, n_extra))
    for m, (h, b) in enumerate(zip(hl, beta_l)):
        damped = cov.normalized_damped_cosine_transform(model, ell * beta_j, ell * b, refine)
        paired = ell * h**2 / b * r0 * damped - r0 * h**2 / (beta_j**2 + b**2)
        terms[:, m] = pref * paired
    jj = basis.indices[:, None]
    ll = l_idx[None, :]
    series = hl[None, :] ** 2 / ((ll - jj) ** 2 * (ll + jj - 1) ** 2)
    terms -= 2 * r2 * (hj**2 / (ell**2 * beta_j))[:, None] * series
    return terms


def boundary_phase_groups(basis: ModeBasis, model: CovarianceModel, refine: int = 1) -> np.ndarray:
    """The three propagating contributions to ``1/L_j`` as rows of a (3, N) array."""
    n = basis.mode_count
    ell, depth = model.corr_length, basis.depth
    r0, r2 = model.variance, cov.covariance_second_derivative(model)
    j = basis.indices
    hj = j - 0.5
    beta = basis.axial_wavenumbers

    # the sine transform of R already carries R(0); the printed R(0) prefactor
    # is read as normalizing it
    gamma = r0 * cov.normalized_sine_transform(model, (beta[:, None] - beta[None, :]) * ell, refine)
    g1 = np.pi**4 * ell * hj**2 / (depth**4 * beta) * ((hj**2 / beta)[None, :] * gamma).sum(axis=1)

    jj, ll = j[:, None], j[None, :]
    off = ~np.eye(n, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        s2 = np.where(off, (beta[None, :] + beta[:, None]) * hj[None, :] ** 2
                      / (beta[None, :] * (jj + ll - 1) * (jj - ll)), 0.0)
        s3 = np.where(off, (beta[:, None] - beta[None, :]) * hj[None, :] ** 2
                      / (beta[None, :] * (jj + ll - 1) ** 2 * (jj - ll) ** 2), 0.0)
    g2 = np.pi**2 * hj**2 * r0 / (depth**2 * beta) * (-1.5 + s2.sum(axis=1))
    g3 = r2 * hj**2 / (ell**2 * beta) * (np.pi**2 / 6 + s3.sum(axis=1))
    return np.vstack([g1, g2, g3])


def net_phase_boundary(basis: ModeBasis, model: CovarianceModel,
                       n_extra: int | None = None, refine: int = 1) -> np.ndarray:
    """Inverse net phase scales ``1/L_j`` for a perturbed boundary.

    Raises
    ------
    DivergenceError
        If the truncated evanescent sum fails its convergence check.
    """
    if model.kind != "boundary":
        raise ConfigurationError("net_phase_boundary needs a boundary model")
    groups = boundary_phase_groups(basis, model, refine)
    terms = boundary_evanescent_terms(basis, model, n_extra, refine)
    _check_tail(_tail_fraction(terms), "boundary net phase")
    return groups.sum(axis=0) + terms.sum(axis=1)


# -- medium perturbations ------------------------------------------------------------

def _medium_rates(basis: ModeBasis, model: CovarianceModel, overlaps: np.ndarray) -> np.ndarray:
    n, ell, k = basis.mode_count, model.corr_length, basis.wavenumber
    beta = basis.axial_wavenumbers
    q = (beta[:, None] - beta[None, :]) * ell
    return k**4 * ell / (8 * np.outer(beta, beta)) * cov.psd(model, q) * overlaps[:, :n]


def _overlaps_or_compute(basis, model, overlaps, n_extra=0):
    if overlaps is None or overlaps.shape[1] < basis.mode_count + n_extra:
        return cov.medium_overlaps(basis, model, n_extra)
    return overlaps


def smfp_medium(basis: ModeBasis, model: CovarianceModel,
                overlaps: np.ndarray | None = None) -> np.ndarray:
    """Inverse scattering mean free paths ``1/S_j`` for a perturbed medium."""
    if model.kind != "medium":
        raise ConfigurationError("smfp_medium needs a medium model")
    overlaps = _overlaps_or_compute(basis, model, overlaps)
    return _medium_rates(basis, model, overlaps).sum(axis=1)


def medium_evanescent_terms(basis: ModeBasis, model: CovarianceModel,
                            overlaps: np.ndarray | None = None,
                            n_extra: int | None = None, refine: int = 1) -> np.ndarray:
    n = basis.mode_count
    n_extra = EVANESCENT_FACTOR * n if n_extra is None else n_extra
    overlaps = _overlaps_or_compute(basis, model, overlaps, n_extra)
    ell, k = model.corr_length, basis.wavenumber
    beta_j = basis.axial_wavenumbers
    _, beta_l = _evanescent_wavenumbers(basis, n_extra)
    terms = np.empty((n, n_extra))
    for m, b in enumerate(beta_l):
        damped = cov.normalized_damped_cosine_transform(model, ell * beta_j, ell * b, refine)
        terms[:, m] = model.variance * overlaps[:, n + m] * damped / b
    return terms * (k**4 * ell / (2 * beta_j))[:, None]


def net_phase_medium(basis: ModeBasis, model: CovarianceModel,
                     overlaps: np.ndarray | None = None,
                     n_extra: int | None = None, refine: int = 1) -> np.ndarray:
    """Inverse net phase scales ``1/L_j`` for a perturbed medium."""
    if model.kind != "medium":
        raise ConfigurationError("net_phase_medium needs a medium model")
    n = basis.mode_count
    n_extra = EVANESCENT_FACTOR * n if n_extra is None else n_extra
    overlaps = _overlaps_or_compute(basis, model, overlaps, n_extra)
    ell, k = model.corr_length, basis.wavenumber
    beta = basis.axial_wavenumbers
    gamma = cov.normalized_sine_transform(model, (beta[:, None] - beta[None, :]) * ell, refine)
    gamma = model.variance * overlaps[:, :n] * gamma
    propagating = k**4 * ell / (8 * beta) * (gamma / beta[None, :]).sum(axis=1)
    terms = medium_evanescent_terms(basis, model, overlaps, n_extra, refine)
    _check_tail(_tail_fraction(terms), "medium net phase")
    return propagating + terms.sum(axis=1)


# -- coupling, transfer, equipartition ----------------------------------------------

def _generator_from_rates(rates: np.ndarray) -> np.ndarray:
    g = rates.copy()
    np.fill_diagonal(g, 0.0)
    g = 0.5 * (g + g.T)
    np.fill_diagonal(g, -g.sum(axis=1))
    return g


def coupling_matrix(basis: ModeBasis, model: CovarianceModel,
                    overlaps: np.ndarray | None = None) -> np.ndarray:
    """Symmetric generator ``Gamma`` with nonnegative off-diagonal entries and zero row sums."""
    if model.kind == "boundary":
        return _generator_from_rates(_boundary_rates(basis, model))
    overlaps = _overlaps_or_compute(basis, model, overlaps)
    return _generator_from_rates(_medium_rates(basis, model, overlaps))


def _spectrum(gamma: np.ndarray):
    lam, vec = np.linalg.eigh(gamma)
    lam, vec = lam[::-1], vec[:, ::-1]
    signs = np.sign(vec.sum(axis=0))
    signs[signs == 0] = 1.0
    return lam, vec * signs


def compute_mode_statistics(basis: ModeBasis, model: CovarianceModel, *,
                            include_phase: bool = True, n_extra: int | None = None,
                            refine: int = 1) -> ModeStatistics:
    """All per-mode scales and the coupling spectrum in one pass."""
    n = basis.mode_count
    n_extra = EVANESCENT_FACTOR * n if n_extra is None else n_extra
    meta = {"evanescent_modes": n_extra, "evanescent_rule": f"N + {n_extra}, tail < {TAIL_TOLERANCE:g}",
            "refine": refine}
    if model.kind == "boundary":
        inv_s = smfp_boundary(basis, model)
        gamma = coupling_matrix(basis, model)
        if include_phase:
            groups = boundary_phase_groups(basis, model, refine)
            terms = boundary_evanescent_terms(basis, model, n_extra, refine)
    else:
        overlaps = cov.medium_overlaps(basis, model, n_extra if include_phase else 0)
        inv_s = smfp_medium(basis, model, overlaps)
        gamma = coupling_matrix(basis, model, overlaps)
        if include_phase:
            beta = basis.axial_wavenumbers
            ell = model.corr_length
            gam = cov.normalized_sine_transform(model, (beta[:, None] - beta[None, :]) * ell, refine)
            g1 = (basis.wavenumber**4 * ell / (8 * beta)
                  * (model.variance * overlaps[:, :n] * gam / beta[None, :]).sum(axis=1))
            groups = g1[None, :]
            terms = medium_evanescent_terms(basis, model, overlaps, n_extra, refine)
    if include_phase:
        fraction = _tail_fraction(terms)
        meta["evanescent_tail_fraction"] = float(np.max(fraction))
        _check_tail(fraction, f"{model.kind} net phase")
        inv_l = groups.sum(axis=0) + terms.sum(axis=1)
    else:
        inv_l = np.full(n, np.nan)
    lam, vec = _spectrum(gamma)
    return ModeStatistics(basis, model, inv_s, inv_l, gamma, lam, vec, meta)


def transfer_matrix(stats: ModeStatistics, range_z: float) -> np.ndarray:
    """``exp(Gamma z)`` from the symmetric eigendecomposition."""
    if range_z < 0:
        raise ConfigurationError("range must be non-negative")
    if range_z == 0:
        return np.eye(stats.basis.mode_count)
    u = stats.eigenvectors
    return (u * np.exp(stats.eigenvalues * range_z)) @ u.T


def equipartition_distance(stats: ModeStatistics) -> float:
    """``-1 / Lambda_2``."""
    if stats.basis.mode_count < 2:
        raise DegenerateSpectrumError("equipartition needs at least two modes")
    lam2 = stats.eigenvalues[1]
    if lam2 >= -DEGENERATE_GAP:
        raise DegenerateSpectrumError(
            f"second eigenvalue {lam2:.3g} is not negative: modes are decoupled")
    return float(-1.0 / lam2)


# -- amplitude moments ---------------------------------------------------------------

def _select(values: np.ndarray, j):
    return values if j is None else values[np.asarray(j) - 1]


def mean_amplitude(stats: ModeStatistics, pulse: Pulse, x_o: float, omega, range_z: float,
                   j=None) -> np.ndarray:
    """Coherent mode amplitudes, shape (N, len(omega)) or selected rows.

    Slowly varying factors are frozen at the basis frequency (narrowband model).
    """
    basis = stats.basis
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    beta = basis.axial_wavenumbers
    phi = eigenfunction(basis, basis.indices, x_o)
    source = (phi / (2j * pulse.bandwidth * np.sqrt(beta)))[:, None] * pulse_spectrum(pulse, omega)[None, :]
    decay = np.exp(range_z * (-stats.inv_smfp + 1j * stats.inv_phase))
    return _select(source * decay[:, None], j)


def second_moment(stats: ModeStatistics, pulse: Pulse, x_o: float, omega, range_z: float,
                  j=None) -> np.ndarray:
    """Mean mode powers ``E|a_j|^2``, shape (N, len(omega)) or selected rows."""
    basis = stats.basis
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    phi2 = eigenfunction(basis, basis.indices, x_o) ** 2
    mix = transfer_matrix(stats, range_z) @ (phi2 / basis.axial_wavenumbers)
    spec = np.abs(pulse_spectrum(pulse, omega)) ** 2 / (4 * pulse.bandwidth**2)
    return _select(mix[:, None] * spec[None, :], j)


def mode_snr(stats: ModeStatistics, range_z: float, j=None) -> np.ndarray:
    """Coherence of each mode at range ``z``, taken as ``exp(-z / S_j)``."""
    return _select(np.exp(-range_z * stats.inv_smfp), j)


def band_statistics(geometry: WaveguideGeometry, model: CovarianceModel, omegas, *,
                    include_phase: bool = True, evanescent_factor: int = EVANESCENT_FACTOR
                    ) -> list[ModeStatistics]:
    """Recompute the statistics at each frequency in ``omegas``.

    The mode count may differ across a wide band; callers compare the common
    leading modes.
    """
    out = []
    for omega in np.atleast_1d(np.asarray(omegas, dtype=float)):
        basis = build_mode_basis(geometry, float(omega))
        out.append(compute_mode_statistics(basis, model, include_phase=include_phase,
                                           n_extra=evanescent_factor * basis.mode_count))
    return out


def coherent_mode_count(stats: ModeStatistics, range_z: float) -> int:
    """Number of modes whose scattering mean free path reaches ``range_z``."""
    return int(np.sum(stats.smfp >= range_z))


# -- output --------------------------------------------------------------------------

BAND_COLUMNS = ("omega", "N", "j", "S_j", "L_j", "S_j_over_center")


def write_band_table(band: list[ModeStatistics], center: ModeStatistics, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BAND_COLUMNS)
        for st_ in band:
            n = min(st_.basis.mode_count, center.basis.mode_count)
            ratio = st_.smfp[:n] / center.smfp[:n]
            for j in range(st_.basis.mode_count):
                w.writerow([repr(float(st_.basis.frequency)), st_.basis.mode_count, j + 1,
                            repr(float(st_.smfp[j])), repr(float(st_.phase_scale[j])),
                            repr(float(ratio[j])) if j < n else ""])


STATS_COLUMNS = ("j", "beta_j", "S_j", "L_j", "snr_at_zA")


def write_stats_table(stats: ModeStatistics, path, range_z: float) -> None:
    snr = mode_snr(stats, range_z)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(STATS_COLUMNS)
        for j, b, s, l, q in zip(stats.basis.indices, stats.basis.axial_wavenumbers,
                                 stats.smfp, stats.phase_scale, snr):
            w.writerow([int(j), repr(float(b)), repr(float(s)), repr(float(l)), repr(float(q))])


def stats_summary(stats: ModeStatistics) -> dict:
    try:
        l_equip = equipartition_distance(stats)
    except DegenerateSpectrumError:
        l_equip = None
    return {
        "kind": stats.model.kind,
        "family": stats.model.family,
        "epsilon": stats.model.epsilon,
        "corr_length": stats.model.corr_length,
        "depth": stats.basis.depth,
        "mode_count": stats.basis.mode_count,
        "eigenvalues": [float(v) for v in stats.eigenvalues],
        "L_equip": l_equip,
        "metadata": stats.metadata,
    }


def write_stats_summary(stats: ModeStatistics, path) -> None:
    with open(path, "w") as fh:
        json.dump(stats_summary(stats), fh, indent=2)
