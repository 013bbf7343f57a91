"""Projected ascent for monotone nonnegative unit-norm mode weights."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import isotonic_regression

from .errors import ZeroImageError
from .imaging import ImageBuilder, ImageSpec, Window, WeightVector
from .synthesis import ModalData


@dataclass(frozen=True)
class OptimizerSettings:
    max_iter: int = 500
    tol: float = 1e-8
    patience: int = 10
    fd_step: float = 1e-4
    initial_step: float = 0.1
    max_halvings: int = 40


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    weights: WeightVector
    objective: float
    converged: bool
    iterations: int
    trace: list = field(default_factory=list)


def project_monotone(values) -> np.ndarray:
    """Nearest point of ``{w_1 >= ... >= w_N >= 0}`` rescaled to unit norm.

    Falls back to the first unit vector if the projection vanishes.
    """
    v = np.asarray(values, dtype=float)
    w = np.clip(isotonic_regression(v, increasing=False).x, 0.0, None)
    norm = np.linalg.norm(w)
    if norm == 0:
        w = np.zeros_like(v)
        w[0] = 1.0
        return w
    return w / norm


class _Objective:
    """Local figure of merit with cheap single-mode perturbations."""

    def __init__(self, builder: ImageBuilder, window: Window, phases: np.ndarray):
        self.b = builder
        self.window = window
        self.phases = phases
        # per-mode images P_k = G_k(z) phi_k(x), scaled by the fixed phase
        self.modes = (builder.range_factors * phases[:, None])[:, :, None] * builder.phi[:, None, :]
        self.gram = builder.gram * np.outer(phases, phases.conj())

    def _score(self, img: np.ndarray, norm2: float) -> float:
        if not norm2 > 0:
            raise ZeroImageError("image has zero norm")
        mag = np.abs(img)
        iz, ix = np.unravel_index(np.argmax(mag), mag.shape)
        sz, sx = self.b.window_mask((iz, ix), self.window)
        if self.window.average == "modulus":
            value = mag[sz, sx].mean()
        else:
            value = abs(img[sz, sx].mean())
        return float(value**2 / norm2)

    def image(self, m: np.ndarray) -> np.ndarray:
        return np.tensordot(m, self.modes, axes=1)

    def norm2(self, m: np.ndarray) -> float:
        return float(np.real(m @ self.gram @ m))

    def value(self, m: np.ndarray) -> float:
        return self._score(self.image(m), self.norm2(m))

    def gradient(self, m: np.ndarray, f0: float, h: float) -> np.ndarray:
        img = self.image(m)
        qm = self.gram @ m
        n2 = float(np.real(m @ qm))
        g = np.empty(m.size)
        for k in range(m.size):
            n2k = n2 + 2 * h * float(np.real(qm[k])) + h * h * float(np.real(self.gram[k, k]))
            g[k] = (self._score(img + h * self.modes[k], n2k) - f0) / h
        return g


def optimize_with_builder(builder: ImageBuilder, init, window: Window = Window(),
                          phases=None, settings: OptimizerSettings = OptimizerSettings()
                          ) -> OptimizationResult:
    """Maximize the local figure of merit over weight magnitudes.

    Phases are held fixed (unit phases by default). Returns the best iterate
    with a convergence flag and the objective trace.
    """
    n = builder.basis.mode_count
    phases = np.ones(n, dtype=complex) if phases is None else np.exp(1j * np.angle(phases))
    obj = _Objective(builder, window, phases)
    m = project_monotone(np.abs(np.asarray(getattr(init, "values", init))))
    f = obj.value(m)
    best_m, best_f = m, f
    trace = [{"iteration": 0, "objective": f, "step_norm": 0.0}]
    history = [f]
    step = settings.initial_step
    converged = False
    it = 0
    for it in range(1, settings.max_iter + 1):
        g = obj.gradient(m, f, settings.fd_step)
        gnorm = np.linalg.norm(g)
        if gnorm == 0:
            converged = True
            break
        direction = g / gnorm
        accepted = False
        for _ in range(settings.max_halvings):
            trial = project_monotone(m + step * direction)
            ft = obj.value(trial)
            if ft > f:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True
            trace.append({"iteration": it, "objective": f, "step_norm": 0.0})
            break
        step_norm = float(np.linalg.norm(trial - m))
        m, f = trial, ft
        step = min(2 * step, 1.0)
        if f > best_f:
            best_m, best_f = m, f
        trace.append({"iteration": it, "objective": f, "step_norm": step_norm})
        history.append(f)
        if len(history) > settings.patience:
            ref = history[-1 - settings.patience]
            if abs(f - ref) <= settings.tol * abs(f):
                converged = True
                break
    return OptimizationResult(WeightVector.normalized(best_m * phases), best_f, converged, it, trace)


def optimize_weights(data: ModalData, basis, spec: ImageSpec = ImageSpec(),
                     window: Window = Window(), init=None, phases=None,
                     settings: OptimizerSettings = OptimizerSettings()) -> OptimizationResult:
    builder = ImageBuilder(data, basis, spec)
    if init is None:
        init = np.ones(basis.mode_count)
    return optimize_with_builder(builder, init, window, phases, settings)
