"""Scenario execution: statistics tables, images, optimization and comparisons.

Every file written gets a ``<file>.meta.json`` sidecar with the configuration
hash, the seed and the package version.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import __version__
from .config import Scenario
from .covariance import CovarianceModel
from .errors import ConfigurationError
from .imaging import (
    ImageBuilder,
    ImageSpec,
    Window,
    cosine_similarity,
    crossrange_weights,
    figure_of_merit,
    figure_of_merit_local,
    ideal_optimal_weights,
    random_theoretical_weights,
    range_weights,
    uniform_weights,
    write_image_csv,
    write_trace_json,
    write_weights_csv,
)
from .optimize import OptimizerSettings, optimize_with_builder
from .pulse import Pulse, frequency_grid
from .spectral import WaveguideGeometry, build_mode_basis
from .stochastic import (
    band_statistics,
    compute_mode_statistics,
    equipartition_distance,
    write_band_table,
    write_stats_summary,
    write_stats_table,
)
from .synthesis import (
    default_array,
    full_aperture_array,
    ideal_array_data,
    mode_decompose,
    receiver_field,
    surrogate_random_data,
    write_modal_csv,
    write_receiver_csv,
)


def write_sidecar(path: Path, scenario: Scenario, seed: int | None = None, **extra) -> None:
    meta = {"config_hash": scenario.config_hash(), "scenario": scenario.name,
            "seed": seed, "version": __version__, **extra}
    with open(f"{path}.meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def _write_json(path: Path, payload, scenario: Scenario, seed=None) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    write_sidecar(path, scenario, seed)


@dataclass
class Experiment:
    """Objects derived from a scenario, built lazily."""

    scenario: Scenario

    @cached_property
    def basis(self):
        return build_mode_basis(WaveguideGeometry(self.scenario["geometry.depth"]))

    @cached_property
    def model(self) -> CovarianceModel | None:
        s = self.scenario
        if s["perturbation.kind"] == "none":
            return None
        return CovarianceModel(s["perturbation.kind"], s["perturbation.family"],
                               s["perturbation.epsilon"], s["perturbation.corr_length"])

    @cached_property
    def stats(self):
        if self.model is None:
            raise ConfigurationError("perturbation.kind: statistics need a random perturbation")
        factor = self.scenario["stats.evanescent_factor"]
        return compute_mode_statistics(self.basis, self.model,
                                       n_extra=factor * self.basis.mode_count)

    @cached_property
    def pulse(self) -> Pulse:
        return Pulse.from_relative_band(self.scenario["pulse.relative_band"], self.scenario["pulse.shape"])

    @cached_property
    def array(self):
        s = self.scenario
        if s["array.layout"] == "full":
            return full_aperture_array(self.basis.depth, s["array.range"], s["array.spacing"])
        return default_array(s["array.range"], s["array.count"], s["array.spacing"])

    @cached_property
    def frequencies(self) -> np.ndarray:
        s = self.scenario
        if s["frequency.step"] > 0:
            return frequency_grid(self.pulse, step=s["frequency.step"], cap=s["frequency.cap"])
        if self.model is not None and self.model.epsilon > 0:
            omega_c = self.model.epsilon**2 * self.basis.frequency
            return frequency_grid(self.pulse, step=omega_c / 2, cap=s["frequency.cap"])
        return frequency_grid(self.pulse, n=s["frequency.samples"], cap=s["frequency.cap"])

    @property
    def image_spec(self) -> ImageSpec:
        s = self.scenario
        return ImageSpec(s["image.x_step"], s["image.z_step"], s["image.z_half"])

    @property
    def window(self) -> Window:
        s = self.scenario
        return Window(s["window.range"], s["window.crossrange"], s["window.average"])

    @property
    def optimizer_settings(self) -> OptimizerSettings:
        s = self.scenario
        return OptimizerSettings(max_iter=s["optimizer.max_iter"], tol=s["optimizer.tol"],
                                 fd_step=s["optimizer.fd_step"])

    def data(self, seed: int, realization: int):
        """Modal data and receiver field for one realization."""
        s = self.scenario
        x_o = s["source.x"]
        if self.model is None:
            data, field_ = ideal_array_data(self.basis, self.pulse, x_o, self.array, self.frequencies,
                                            s["frequency.dispersion"])
        else:
            data = surrogate_random_data(self.basis, self.pulse, x_o, self.array, self.stats,
                                         self.frequencies, seed, realization)
            field_ = receiver_field(data, self.basis, self.array, s["frequency.dispersion"])
        if s["array.decompose"]:
            data = mode_decompose(field_, self.basis, self.array)
        return data, field_

    def weights(self, choice: str):
        x_o, z_a = self.scenario["source.x"], self.scenario["array.range"]
        n = self.basis.mode_count
        if choice == "uniform":
            return uniform_weights(n)
        if choice == "ideal":
            return ideal_optimal_weights(self.basis, x_o)
        if choice == "crossrange":
            return crossrange_weights(self.basis, x_o)
        if choice == "range":
            return range_weights(self.basis, x_o)
        if choice == "theory":
            return random_theoretical_weights(self.stats, x_o, z_a)
        raise ConfigurationError(f"run.weights: {choice!r} is not a closed-form choice")

    def optimizer_phases(self) -> np.ndarray:
        if self.model is None:
            return np.ones(self.basis.mode_count, dtype=complex)
        return np.exp(1j * self.scenario["array.range"] * self.stats.inv_phase)


def _out_dir(scenario: Scenario, out: str | Path | None) -> Path:
    path = Path(out if out is not None else scenario["output.dir"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def run_stats(scenario: Scenario, out: str | Path | None = None) -> dict:
    """Per-mode scales, coupling spectrum and equipartition distance."""
    exp = Experiment(scenario)
    stats = exp.stats
    equipartition_distance(stats)
    out = _out_dir(scenario, out)
    table = out / "stats.csv"
    write_stats_table(stats, table, scenario["array.range"])
    write_sidecar(table, scenario)
    summary = out / "stats.json"
    write_stats_summary(stats, summary)
    write_sidecar(summary, scenario)
    if scenario["stats.per_frequency"]:
        lo, hi = exp.pulse.band
        m = scenario["stats.band_samples"]
        # cell midpoints: the band edges of common depths put a mode exactly at cutoff
        omegas = lo + (hi - lo) * (np.arange(m) + 0.5) / m
        band = band_statistics(exp.basis.geometry, exp.model, omegas,
                               evanescent_factor=scenario["stats.evanescent_factor"])
        path = out / "stats_band.csv"
        write_band_table(band, stats, path)
        write_sidecar(path, scenario)
    return {"rows": stats.basis.mode_count, "L_equip": equipartition_distance(stats),
            "S": stats.smfp.tolist(), "L": stats.phase_scale.tolist()}


def _realization(exp: Experiment, seed: int, r: int, choices, out: Path, write_images: bool) -> dict:
    s = exp.scenario
    x_o = s["source.x"]
    data, field_ = exp.data(seed, r)
    builder = ImageBuilder(data, exp.basis, exp.image_spec, s["frequency.dispersion"])
    tag = f"r{r:03d}"
    if write_images:
        path = out / f"data_{tag}.csv"
        write_modal_csv(data, path)
        write_sidecar(path, s, seed, realization=r, provenance=data.provenance)
        path = out / f"receivers_{tag}.csv"
        write_receiver_csv(field_, path)
        write_sidecar(path, s, seed, realization=r)
    report = {"realization": r}
    for choice in choices:
        if choice == "optimized":
            res = optimize_with_builder(builder, np.ones(exp.basis.mode_count), exp.window,
                                        exp.optimizer_phases(), exp.optimizer_settings)
            w = res.weights
            trace = out / f"trace_{tag}_{choice}.json"
            write_trace_json(res.trace, trace)
            write_sidecar(trace, s, seed, realization=r)
            extra = {"converged": res.converged, "iterations": res.iterations}
            if exp.model is not None:
                extra["cosine_to_theory"] = cosine_similarity(w, exp.weights("theory"))
            else:
                extra["cosine_to_ideal"] = cosine_similarity(w, exp.weights("ideal"))
        else:
            w, extra = exp.weights(choice), {}
        img = builder.image(w)
        x_peak, z_peak = img.peak_location
        report[choice] = {
            "M": figure_of_merit(builder, w),
            "M_num": figure_of_merit_local(builder, w, exp.window),
            "peak_x": x_peak, "peak_z": z_peak,
            "peak_offset": img.peak_offset(x_o),
            "crossrange_offset": x_peak - x_o,
            **extra,
        }
        wpath = out / f"weights_{tag}_{choice}.csv"
        write_weights_csv(w, wpath)
        write_sidecar(wpath, s, seed, realization=r)
        if write_images:
            ipath = out / f"image_{tag}_{choice}.csv"
            write_image_csv(img, ipath)
            write_sidecar(ipath, s, seed, realization=r)
    return report


def run_image(scenario: Scenario, out: str | Path | None = None, seed: int | None = None,
              realizations: int | None = None, threads: int = 1,
              extra_choices: tuple[str, ...] = ()) -> dict:
    """Images, weights and figures of merit for every realization and weighting."""
    seed = scenario["montecarlo.seed"] if seed is None else seed
    n_real = scenario["montecarlo.realizations"] if realizations is None else realizations
    if n_real < 1:
        raise ConfigurationError("montecarlo.realizations: must be at least 1")
    if threads < 1:
        raise ConfigurationError("--threads must be at least 1")
    exp = Experiment(scenario)
    if exp.model is None:
        n_real = 1
    else:
        _ = exp.stats
    choices = list(dict.fromkeys(list(scenario["run.weights"]) + list(extra_choices)))
    out = _out_dir(scenario, out)
    all_images = scenario["output.all_images"]

    def job(r):
        return _realization(exp, seed, r, choices, out, all_images or r == 0)

    if threads == 1:
        reports = [job(r) for r in range(n_real)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(job, range(n_real)))
    summary = {"scenario": scenario.name, "seed": seed, "realizations": n_real,
               "weights": choices, "reports": reports}
    _write_json(out / "summary.json", summary, scenario, seed)
    return summary


def run_optimize(scenario: Scenario, **kwargs) -> dict:
    """:func:`run_image` with the optimized weighting always included."""
    return run_image(scenario, extra_choices=("optimized",), **kwargs)


def coherence_report(stats, ranges) -> dict:
    smfp = stats.smfp
    l_equip = equipartition_distance(stats)
    return {
        "kind": stats.model.kind,
        "L_equip": l_equip,
        "max_S": float(np.max(smfp)),
        "coherent_modes": {str(r): int(np.sum(smfp >= r)) for r in ranges},
        "incoherent_window": [float(np.max(smfp)), l_equip] if np.max(smfp) < l_equip else None,
    }


def run_compare(first: Scenario, second: Scenario, out: str | Path | None = None) -> dict:
    """Side-by-side coherence scales of two perturbation models in one geometry."""
    if first["geometry.depth"] != second["geometry.depth"]:
        raise ConfigurationError("geometry.depth: compared scenarios must share the geometry")
    sa, sb = Experiment(first).stats, Experiment(second).stats
    ranges = sorted(set(first["stats.ranges"]) | set(second["stats.ranges"]))
    out = _out_dir(first, out)
    path = out / "compare.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("j", f"S_j_{first.name}", f"S_j_{second.name}", f"L_j_{first.name}", f"L_j_{second.name}"))
        for j in range(sa.basis.mode_count):
            w.writerow([j + 1, repr(float(sa.smfp[j])), repr(float(sb.smfp[j])),
                        repr(float(sa.phase_scale[j])), repr(float(sb.phase_scale[j]))])
    write_sidecar(path, first, compared_with=second.config_hash())
    report = {first.name: coherence_report(sa, ranges), second.name: coherence_report(sb, ranges),
              "ranges": ranges}
    _write_json(out / "compare.json", report, first)
    return report
