"""Write the bundled two-blob IDX fixture used by the digit-benchmark
stand-in test. Class -1 is stored as digit 3 and class +1 as digit 8.

    python scripts/make_blob_fixture.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from gradlearn.io import write_idx_images, write_idx_labels
from gradlearn.simulate import gen_two_blob

N_TRAIN, N_TEST, SEED = 60, 100, 0


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    per = N_TRAIN + N_TEST
    full = gen_two_blob(per, seed=SEED)
    images = np.round(full.X * 255).astype(np.uint8).reshape(-1, 28, 28)
    digits = np.where(full.y > 0, 8, 3)
    parts = {
        "train": np.r_[0:N_TRAIN, per : per + N_TRAIN],
        "test": np.r_[N_TRAIN:per, per + N_TRAIN : 2 * per],
    }
    for name, idx in parts.items():
        write_idx_images(out / f"blob-{name}-images-idx3-ubyte", images[idx])
        write_idx_labels(out / f"blob-{name}-labels-idx1-ubyte", digits[idx])
        print(f"{name}: {idx.size} images -> {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "tests" / "data")
