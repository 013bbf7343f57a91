"""Sensitivity of the coherence scales to the perturbation strength.

Both the coherent-mode count and the equipartition distance scale exactly
with 1/eps^2, so for each model this script finds the strength that would
put them at a chosen target and compares it with the preset value.

    python scripts/coherence_sensitivity.py --count-target 20 --count-range 100 --equip-target 200
"""

import argparse

import numpy as np

from rwimaging.config import load_preset
from rwimaging.runner import Experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count-target", type=int, default=20)
    parser.add_argument("--count-range", type=float, default=100.0)
    parser.add_argument("--equip-target", type=float, default=200.0)
    args = parser.parse_args()

    boundary = Experiment(load_preset("fig1")).stats
    eps = boundary.model.epsilon
    smfp = np.sort(boundary.smfp)[::-1]
    # S_j scales as eps^-2: the target count holds once S_(target) >= range
    needed = eps * np.sqrt(smfp[args.count_target - 1] / args.count_range)
    print(f"boundary: eps = {eps}, modes with S_j >= {args.count_range:g}: "
          f"{int(np.sum(smfp >= args.count_range))}")
    print(f"  largest eps keeping {args.count_target} coherent modes: {needed:.5f} "
          f"(factor {(needed / eps) ** 2:.3f} on the rates)")
    print(f"  L_equip / S_1 = {boundary.equip_distance / boundary.smfp[0]:.3f} (eps independent)")

    medium = Experiment(load_preset("fig2")).stats
    eps = medium.model.epsilon
    l_equip = medium.equip_distance
    target = eps * np.sqrt(l_equip / args.equip_target)
    print(f"\nmedium: eps = {eps}, L_equip = {l_equip:.1f}, S_1 = {medium.smfp[0]:.1f}, "
          f"max S_j = {medium.smfp.max():.1f}")
    print(f"  eps giving L_equip = {args.equip_target:g}: {target:.5f}; S_1 would be "
          f"{medium.smfp[0] * (eps / target) ** 2:.1f}")
    ratio = l_equip / medium.smfp[0]
    print(f"  L_equip / S_1 = {ratio:.2f} is fixed by the correlation model")

    # the correlation length changes the ratio; scan it at fixed eps
    print("\n  corr_length  L_equip/S_1")
    for ell in (0.5, 0.75, 1.0, 1.5, 2.0):
        s = Experiment(load_preset("fig2").replace(perturbation__corr_length=ell)).stats
        print(f"  {ell:11.2f}  {s.equip_distance / s.smfp[0]:11.2f}")


if __name__ == "__main__":
    main()
