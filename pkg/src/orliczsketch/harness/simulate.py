"""Synthetic data for the regression and low-rank experiments."""
import math
from dataclasses import dataclass

import numpy as np

from ..matrix import MatrixHandle
from ..randgen import as_generator


@dataclass(frozen=True)
class NoiseSpec:
    """``kind`` is gaussian, sparse or mixed.

    Gaussian noise has standard deviation ``sigma``. Sparse noise perturbs
    ``ceil(fraction * n)`` entries by Uniform(-s ||Ax*||_2, s ||Ax*||_2).
    Mixed noise adds both.
    """

    kind: str = "gaussian"
    sigma: float = 0.0
    fraction: float = 0.0
    scale: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "sparse", "mixed"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("fraction must lie in [0, 1]")
        if self.sigma < 0 or self.scale < 0:
            raise ValueError("sigma and scale must be nonnegative")

    @classmethod
    def gaussian(cls, sigma):
        return cls("gaussian", sigma=sigma)

    @classmethod
    def sparse(cls, fraction, scale):
        return cls("sparse", fraction=fraction, scale=scale)

    @classmethod
    def mixed(cls, sigma, fraction, scale):
        return cls("mixed", sigma=sigma, fraction=fraction, scale=scale)

    def as_dict(self):
        return {"kind": self.kind, "sigma": self.sigma, "fraction": self.fraction,
                "scale": self.scale}


def sparse_count(n, fraction):
    # round first so 0.03 * 200 does not land on 6.000000000000001
    return int(math.ceil(round(fraction * n, 9)))


def simulate_regression(n, d, noise, rng):
    """Return ``(A, b, x_star)``.

    The first d+5 rows of A and x* are standard Gaussian; every later row
    copies one of those, picked uniformly. Noise is drawn independently for
    every entry of b = A x* + noise.
    """
    if n < d + 6:
        raise ValueError(f"need n >= d + 6, got n={n}, d={d}")
    rng = as_generator(rng)
    base = d + 5
    A = np.empty((n, d))
    A[:base] = rng.standard_normal((base, d))
    x_star = rng.standard_normal(d)
    src = rng.integers(0, base, size=n - base)
    A[base:] = A[src]
    clean = A @ x_star
    b = clean.copy()
    if noise.kind in ("gaussian", "mixed") and noise.sigma > 0:
        b += noise.sigma * rng.standard_normal(n)
    if noise.kind in ("sparse", "mixed"):
        m = sparse_count(n, noise.fraction)
        if m:
            idx = rng.choice(n, size=m, replace=False)
            amp = noise.scale * np.linalg.norm(clean)
            b[idx] += rng.uniform(-amp, amp, size=m)
    return MatrixHandle.from_dense(A), b, x_star


def simulate_lowrank(n, d, k, outliers, outlier_scale, rng):
    """``U V`` with Uniform(0, 1) factors plus ``outliers`` additive
    Uniform(-scale, scale) corruptions at distinct entries.

    Returns the matrix and the planted rank-k product.
    """
    if not 1 <= k <= min(n, d):
        raise ValueError("k must lie in [1, min(n, d)]")
    if outliers > n * d:
        raise ValueError("more outliers than entries")
    rng = as_generator(rng)
    planted = rng.uniform(0.0, 1.0, (n, k)) @ rng.uniform(0.0, 1.0, (k, d))
    A = planted.copy()
    if outliers:
        flat = rng.choice(n * d, size=outliers, replace=False)
        A.flat[flat] += rng.uniform(-outlier_scale, outlier_scale, size=outliers)
    return MatrixHandle.from_dense(A), planted


def add_outliers(A, fraction, scale, rng):
    """Corrupt ``ceil(fraction * n * d)`` entries of a dense copy of ``A``."""
    rng = as_generator(rng)
    A = np.array(MatrixHandle.wrap(A).to_dense(), dtype=float)
    m = sparse_count(A.size, fraction)
    if m:
        flat = rng.choice(A.size, size=m, replace=False)
        A.flat[flat] += rng.uniform(-scale, scale, size=m)
    return MatrixHandle.from_dense(A)
