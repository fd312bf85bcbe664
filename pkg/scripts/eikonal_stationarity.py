"""Growth of the eikonal under random normal perturbations of a geodesic.

    python3 scripts/eikonal_stationarity.py --n 20
"""
import argparse

import numpy as np

from maupertuis.validation import eikonal_perturbation_growth


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--seed", type=int, default=6)
    args = ap.parse_args()
    slopes, min_gain, S0, geo = eikonal_perturbation_growth(n_perturb=args.n, seed=args.seed)
    print(f"geodesic length L = {geo.params[-1]:g}, S = {S0:.12f}")
    print(f"slopes: min {slopes.min():.4f}  max {slopes.max():.4f}  mean {slopes.mean():.4f}")
    print(f"smallest increase of S: {min_gain:.3e} (positive: geodesic is a local minimum)")
    print(np.array2string(slopes, precision=4))


if __name__ == "__main__":
    main()
