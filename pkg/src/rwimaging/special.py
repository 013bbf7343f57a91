"""Bessel J0 and Struve H0 of real argument.

Power series below ``SERIES_LIMIT`` and Hankel-type asymptotic expansions
beyond it. Both functions are evaluated elementwise.
"""

from __future__ import annotations

import numpy as np

SERIES_LIMIT = 16.0
_MAX_TERMS = 200


def _series(x: float, first: float, ratio) -> float:
    term, total = first, first
    for k in range(_MAX_TERMS):
        term *= ratio(k)
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def _asymptotic_pq(x: float) -> tuple[float, float]:
    """Hankel's P and Q for order zero, summed up to the smallest term."""
    p, q = 0.0, 0.0
    a = 1.0
    prev = np.inf
    for k in range(_MAX_TERMS):
        term = a / x**k
        if abs(term) > prev or abs(term) < 1e-18:
            break
        prev = abs(term)
        sign = (-1) ** (k // 2)
        if k % 2 == 0:
            p += sign * term
        else:
            q += sign * term
        a *= -((2 * k + 1) ** 2) / ((k + 1) * 8.0)
    return p, q


def _j0_scalar(x: float) -> float:
    x = abs(x)
    if x < SERIES_LIMIT:
        h2 = 0.25 * x * x
        return _series(x, 1.0, lambda k: -h2 / (k + 1) ** 2)
    p, q = _asymptotic_pq(x)
    chi = x - 0.25 * np.pi
    return np.sqrt(2 / (np.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def _y0_asymptotic(x: float) -> float:
    p, q = _asymptotic_pq(x)
    chi = x - 0.25 * np.pi
    return np.sqrt(2 / (np.pi * x)) * (p * np.sin(chi) + q * np.cos(chi))


def _h0_scalar(x: float) -> float:
    sign = np.sign(x)
    x = abs(x)
    if x == 0:
        return 0.0
    if x < SERIES_LIMIT:
        h2 = 0.25 * x * x
        first = 0.5 * x / (0.25 * np.pi)
        return sign * _series(x, first, lambda k: -h2 / (k + 1.5) ** 2)
    # H0 - Y0 ~ (2/pi) sum_k (-1)^k ((2k-1)!!)^2 / x^(2k+1)
    term, total, prev = 1.0 / x, 1.0 / x, np.inf
    for k in range(1, _MAX_TERMS):
        nxt = term * -((2 * k - 1) ** 2) / x**2
        if abs(nxt) > prev or abs(nxt) < 1e-18:
            break
        prev = abs(nxt)
        term = nxt
        total += term
    return sign * (_y0_asymptotic(x) + 2 / np.pi * total)


def bessel_j0(x) -> np.ndarray:
    return np.vectorize(_j0_scalar, otypes=[float])(np.asarray(x, dtype=float))


def struve_h0(x) -> np.ndarray:
    return np.vectorize(_h0_scalar, otypes=[float])(np.asarray(x, dtype=float))


def crossrange_profile(k_o: float, x_offset) -> np.ndarray:
    """``(pi/2) J0(k_o |x - x_o|)``."""
    return 0.5 * np.pi * bessel_j0(k_o * np.abs(np.asarray(x_offset, dtype=float)))


def range_profile(k_o: float, z) -> np.ndarray:
    """``(pi/2) (J0 - i H0)(k_o z)``."""
    arg = k_o * np.asarray(z, dtype=float)
    return 0.5 * np.pi * (bessel_j0(arg) - 1j * struve_h0(arg))
