"""kNN error with and without a 2-d gradient reduction on a digit pair.

    python scripts/digit_benchmark.py                       # bundled fixture
    python scripts/digit_benchmark.py --train-images train-images-idx3-ubyte.gz \
        --train-labels train-labels-idx1-ubyte.gz --test-images ... --test-labels ... \
        --pair 3 8 --n-train 60 --seed 0

With real MNIST files the training set is a seeded subsample of
``--n-train`` images per digit.
"""

import argparse
from pathlib import Path

import numpy as np

from gradlearn.data import Dataset
from gradlearn.experiments import reduced_vs_full_knn
from gradlearn.io import load_idx_dataset

FIXTURE = Path(__file__).resolve().parents[1] / "tests" / "data"


def _subsample(data: Dataset, per_class: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    idx = [rng.choice(np.flatnonzero(data.y == c), per_class, replace=False) for c in (-1, 1)]
    return data.subset(np.sort(np.concatenate(idx)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--train-images", default=FIXTURE / "blob-train-images-idx3-ubyte")
    ap.add_argument("--train-labels", default=FIXTURE / "blob-train-labels-idx1-ubyte")
    ap.add_argument("--test-images", default=FIXTURE / "blob-test-images-idx3-ubyte")
    ap.add_argument("--test-labels", default=FIXTURE / "blob-test-labels-idx1-ubyte")
    ap.add_argument("--pair", type=int, nargs=2, default=[3, 8])
    ap.add_argument("--n-train", type=int, default=None, help="per-digit training subsample")
    ap.add_argument("--k-dims", type=int, default=2)
    ap.add_argument("--knn-k", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    pair = tuple(args.pair)
    train = load_idx_dataset(args.train_images, args.train_labels, pair)
    test = load_idx_dataset(args.test_images, args.test_labels, pair)
    if args.n_train:
        train = _subsample(train, args.n_train, args.seed)
    reduced, full = reduced_vs_full_knn(train, test, args.k_dims, args.knn_k)
    print(f"digits {pair[0]} vs {pair[1]}: {train.n} train, {test.n} test")
    print(f"  {reduced.method_label:<10} error {reduced.error_rate:.4f}  ({reduced.dimension_used} dims)")
    print(f"  {full.method_label:<10} error {full.error_rate:.4f}  ({full.dimension_used} dims)")


if __name__ == "__main__":
    main()
