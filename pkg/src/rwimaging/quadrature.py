"""Composite Gauss-Legendre rules on bounded intervals."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

NODES_PER_PANEL = 10


@lru_cache(maxsize=32)
def _reference_rule(n: int):
    return np.polynomial.legendre.leggauss(n)


def composite_gauss_legendre(a: float, b: float, panel_width: float,
                             n: int = NODES_PER_PANEL) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an ``n``-point Gauss-Legendre rule on equal panels.

    The panel count is the smallest that keeps every panel at most
    ``panel_width`` wide.
    """
    if b <= a:
        return np.zeros(0), np.zeros(0)
    n_panels = max(1, int(np.ceil((b - a) / panel_width - 1e-12)))
    edges = np.linspace(a, b, n_panels + 1)
    t, w = _reference_rule(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def oscillatory_panel_width(frequency: float, decay_rate: float = 0.0,
                            scale: float = 1.0, refine: int = 1) -> float:
    """Panel width for integrands ``g(u) cos(frequency u) exp(-decay_rate u)``.

    With ten nodes per panel the node spacing stays below
    ``min(scale, 2 pi / |frequency|, 1 / decay_rate) / 20``.
    """
    limits = [scale]
    if frequency != 0:
        limits.append(2 * np.pi / abs(frequency))
    if decay_rate > 0:
        limits.append(1.0 / decay_rate)
    return min(limits) * NODES_PER_PANEL / 20.0 / refine
