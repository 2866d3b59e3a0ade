"""Sample-size trends: trailing EGCM eigenvalue mass on the linear design and
gradient direction error on a curve in R^20.

    python scripts/trend_experiment.py [--seeds 10]
"""

import argparse

import numpy as np

from gradlearn.experiments import curve_direction_error, linear_residual_mass


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    seeds = range(args.seeds)

    print("trailing eigenvalue mass (k_true = 1)")
    for n in (10, 20, 40, 80):
        mass = [linear_residual_mass(n, s) for s in seeds]
        print(f"  n_per_class={n:3d}  median={np.median(mass):.3f}")

    print("mean gradient angle error on the curve (radians)")
    for n in (20, 40, 80, 160):
        err = [curve_direction_error(n, s) for s in seeds]
        print(f"  n={n:3d}  median={np.median(err):.3f}")


if __name__ == "__main__":
    main()
