"""Ideal-waveguide resolution: imaged profiles against the continuum limits.

Forms the image of a point source with the closed-form optimal weights and
compares its cross-range and range profiles with (pi/2) J0 and
|(pi/2)(J0 - i H0)|. Repeating for several depths shows how the finite mode
count sets the cross-range discrepancy.

    python scripts/resolution_profiles.py --depths 10 20 40 80
"""

import argparse

import numpy as np

from rwimaging.imaging import ImageBuilder, ImageSpec, ideal_optimal_weights
from rwimaging.pulse import Pulse, frequency_grid
from rwimaging.spectral import K_0, WaveguideGeometry, build_mode_basis
from rwimaging.special import bessel_j0, range_profile
from rwimaging.synthesis import ArrayGeometry, ideal_array_data


def profiles(depth, pulse, samples):
    basis = build_mode_basis(WaveguideGeometry(depth))
    x_o = depth / 2
    array = ArrayGeometry(100.0, 0.5 * np.arange(1, int(round(2 * depth))))
    data, _ = ideal_array_data(basis, pulse, x_o, array, frequency_grid(pulse, n=samples))
    spec = ImageSpec(x_min=x_o - 3, x_max=x_o + 3)
    img = ImageBuilder(data, basis, spec).image(ideal_optimal_weights(basis, x_o))
    iz, ix = img.peak_index
    peak = abs(img.values[iz, ix])
    dx = img.x - x_o
    near = np.abs(dx) <= 2
    cross = np.abs(img.values[iz, near]) / peak
    cross_rms = np.sqrt(np.mean((cross - np.abs(bessel_j0(K_0 * np.abs(dx[near])))) ** 2))
    sel = (img.z >= 0) & (img.z <= 20 / K_0)
    rng = np.abs(img.values[sel, ix]) / peak
    range_rms = np.sqrt(np.mean((rng - np.abs(range_profile(K_0, img.z[sel])) / (np.pi / 2)) ** 2))
    return basis.mode_count, cross_rms, range_rms


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--depths", type=float, nargs="+", default=[10.0, 20.0, 40.0, 80.0])
    parser.add_argument("--relative-band", type=float, default=0.025)
    parser.add_argument("--samples", type=int, default=257)
    args = parser.parse_args()

    pulse = Pulse.from_relative_band(args.relative_band, "gaussian")
    print(f"{'D':>6} {'N':>4} {'cross RMS':>10} {'range RMS':>10} {'cross * sqrt(N)':>16}")
    for depth in args.depths:
        n, cross, rng = profiles(depth, pulse, args.samples)
        print(f"{depth:6.1f} {n:4d} {cross:10.2%} {rng:10.2%} {cross * np.sqrt(n):16.3f}")


if __name__ == "__main__":
    main()
