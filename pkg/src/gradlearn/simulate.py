"""Seeded generators for the two-class simulation designs.

Randomness comes from numpy's PCG64 bit generator. One integer seed feeds
a ``SeedSequence`` whose spawned children serve fixed purposes, so adding
draws for one purpose never shifts another:

    child 0: class -1 samples
    child 1: class +1 samples
    child 2: train/test split permutations

Gaussian variates use numpy's ``standard_normal`` (ziggurat) on that
stream. Outputs are bit-identical for a given seed and numpy version.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .data import Dataset

LINEAR_P = 100


class Design(str, enum.Enum):
    LINEAR = "linear"
    HYPERSPHERE = "hypersphere"


@dataclass(frozen=True)
class SimConfig:
    design: Design = Design.LINEAR
    n_per_class: int = 20
    p: int = LINEAR_P
    d: int = 2
    r: float = 3.0
    sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "design", Design(self.design))
        if self.n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.design is Design.LINEAR and self.p != LINEAR_P:
            raise ValueError(f"the linear design has p = {LINEAR_P}")
        if self.design is Design.HYPERSPHERE:
            if not 1 <= self.d <= self.p:
                raise ValueError("hypersphere design needs 1 <= d <= p")
            if not self.r > 0:
                raise ValueError("radius r must be positive")

    def generate(self) -> tuple[Dataset, "GroundTruth"]:
        if self.design is Design.LINEAR:
            return gen_linear_sim(self.n_per_class, self.sigma, self.seed)
        return gen_hypersphere_sim(
            self.n_per_class, self.p, self.d, self.r, self.sigma, self.seed
        )


@dataclass(frozen=True)
class GroundTruth:
    directions: np.ndarray  # p x k, orthonormal columns

    @property
    def k(self) -> int:
        return self.directions.shape[1]


def _streams(seed: int, count: int = 3):
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def linear_class_means() -> tuple[np.ndarray, np.ndarray]:
    """Design means of class -1 and class +1 in R^100."""
    neg = np.zeros(LINEAR_P)
    neg[0:10] = 1.5
    neg[10:20] = -3.0
    pos = np.zeros(LINEAR_P)
    pos[40:50] = -1.5
    pos[50:60] = 3.0
    return neg, pos


def gen_linear_sim(n_per_class: int, sigma: float, seed: int):
    """Two Gaussian classes in R^100 differing in coordinates 1-20 and 41-60.

    Class -1 rows come first. The true direction is the normalized
    mean difference (class -1 minus class +1).
    """
    if n_per_class < 1 or sigma < 0:
        raise ValueError("need n_per_class >= 1 and sigma >= 0")
    neg_mean, pos_mean = linear_class_means()
    rng_neg, rng_pos, _ = _streams(seed)
    shape = (n_per_class, LINEAR_P)
    Xn = neg_mean + sigma * rng_neg.standard_normal(shape)
    Xp = pos_mean + sigma * rng_pos.standard_normal(shape)
    X = np.vstack([Xn, Xp])
    y = np.concatenate([-np.ones(n_per_class), np.ones(n_per_class)])
    diff = neg_mean - pos_mean
    truth = GroundTruth((diff / np.linalg.norm(diff))[:, None])
    return Dataset(X, y), truth


def _sphere_surface(rng, count: int, d: int, radius: float) -> np.ndarray:
    z = rng.standard_normal((count, d))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    while np.any(norms == 0):  # measure-zero, but keep the contract
        bad = norms[:, 0] == 0
        z[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
    return radius * z / norms


def gen_hypersphere_sim(n_per_class, p, d, r, sigma, seed):
    """Concentric spheres in the first d coordinates plus Gaussian noise.

    Class +1 lies on radius ``r``, class -1 on radius ``2.5 r``; the
    remaining ``p - d`` coordinates are N(0, sigma^2).
    """
    cfg = SimConfig(Design.HYPERSPHERE, n_per_class, p, d, r, sigma, seed)
    rng_neg, rng_pos, _ = _streams(seed)
    blocks = []
    for rng, radius in ((rng_neg, 2.5 * r), (rng_pos, r)):
        sphere = _sphere_surface(rng, n_per_class, d, radius)
        noise = sigma * rng.standard_normal((n_per_class, p - d))
        blocks.append(np.hstack([sphere, noise]))
    X = np.vstack(blocks)
    y = np.concatenate([-np.ones(n_per_class), np.ones(n_per_class)])
    truth = GroundTruth(np.eye(cfg.p)[:, : cfg.d])
    return Dataset(X, y), truth


def gen_two_blob(
    n_per_class: int,
    p: int = 784,
    separation: float = 2.0,
    clutter: float = 0.8,
    seed: int = 0,
):
    """Two overlapping Gaussian blobs rendered as byte-valued "images".

    A 2-d latent point is drawn from N(+-separation/2 * e_1, I) per class
    and painted onto two fixed random pixel patterns; every pixel also
    gets uniform clutter on [0, clutter]. Values are quantized to
    multiples of 1/255 so they round-trip through the IDX format. Stands
    in for the digit benchmark, where the class signal is low-dimensional
    and most pixel variance is irrelevant.
    """
    rng_neg, rng_pos, rng_pat = _streams(seed)
    patterns = rng_pat.uniform(-1.0, 1.0, size=(2, p))
    patterns *= rng_pat.uniform(size=(2, p)) < 0.1  # sparse strokes
    out = []
    for rng, sign in ((rng_neg, -1.0), (rng_pos, 1.0)):
        latent = rng.standard_normal((n_per_class, 2))
        latent[:, 0] += sign * separation / 2
        img = 0.5 + 0.12 * latent @ patterns
        img += clutter * (rng.uniform(size=(n_per_class, p)) - 0.5)
        out.append(np.clip(np.round(img * 255), 0, 255) / 255.0)
    X = np.vstack(out)
    y = np.concatenate([-np.ones(n_per_class), np.ones(n_per_class)])
    return Dataset(X, y)


def train_test_split(data: Dataset, n_test: int, seed: int):
    """Seeded disjoint partition into ``(train, test)`` with ``n_test`` test rows."""
    if not 0 <= n_test < data.n:
        raise ValueError(f"n_test must be in [0, {data.n - 1}], got {n_test}")
    perm = _streams(seed)[2].permutation(data.n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return data.subset(train_idx), data.subset(test_idx)
