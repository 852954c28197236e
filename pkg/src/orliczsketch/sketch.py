"""Embedding operators.

``ComposedSketch`` is ``Pi2 @ Pi1 @ D^{-1}``: a diagonal of reciprocal
generalized-exponential draws, a CountSketch and a scaled Gaussian map. The
first two stages run through the CountSketch kernel in one pass over the
stored entries of the input; the Gaussian stage only ever sees the
``t1 x d`` intermediate.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._backend import kernels
from .matrix import MatrixHandle
from .randgen import as_generator, sample_generalized_exponential

DEFAULT_C1 = 10.0
DEFAULT_C2 = 20.0
DEFAULT_C3 = 8.0
EXP_FLOOR = 1e-300


class SketchError(ValueError):
    pass


@dataclass(frozen=True)
class ComposedSketch:
    """``bucket``/``signs`` are None when Pi1 is the identity and ``gauss`` is
    None when the Gaussian stage is skipped (diagonal-only passthrough)."""

    diag_inv: np.ndarray
    bucket: Optional[np.ndarray]
    signs: Optional[np.ndarray]
    gauss: Optional[np.ndarray]
    dims: tuple

    @property
    def n(self):
        return self.dims[0]

    @property
    def out_dim(self):
        return self.dims[2]

    @property
    def passthrough(self):
        return self.gauss is None and self.bucket is None

    def as_dense(self):
        """Explicit t2 x n operator. For tests and tiny problems only."""
        return apply_sketch(self, np.eye(self.n))


def sketch_dims(n, d, c1=DEFAULT_C1, c2=DEFAULT_C2):
    t1 = min(n, math.ceil(c1 * d * d))
    t2 = min(t1, math.ceil(c2 * d))
    return t1, t2


def build_orlicz_sketch(g, n, d, c1=DEFAULT_C1, c2=DEFAULT_C2, rng=None,
                        passthrough=False, t1=None, t2=None):
    """Draw ``Pi2 Pi1 D^{-1}`` for an n-row input of rank at most d.

    ``t1``/``t2`` override the default ``ceil(c1 d^2)``/``ceil(c2 d)`` sizes.
    With ``passthrough`` only ``D^{-1}`` is drawn.
    """
    if n < d or d < 1:
        raise SketchError(f"need n >= d >= 1, got n={n}, d={d}")
    rng = as_generator(rng)
    u = sample_generalized_exponential(g, rng, n)
    u = np.maximum(u, g.inverse(EXP_FLOOR))
    diag_inv = 1.0 / u
    if passthrough:
        return ComposedSketch(diag_inv, None, None, None, (n, n, n))

    dt1, dt2 = sketch_dims(n, d, c1, c2)
    t1 = dt1 if t1 is None else min(int(t1), n)
    t2 = min(dt2, t1) if t2 is None else int(t2)
    if t1 >= n:
        t1 = n
        bucket = signs = None
    else:
        bucket = rng.integers(0, t1, size=n, dtype=np.int64)
        signs = rng.choice(np.array([-1.0, 1.0]), size=n)
    gauss = rng.standard_normal((t2, t1)) / math.sqrt(t2)
    return ComposedSketch(diag_inv, bucket, signs, gauss, (n, t1, t2))


def apply_first_stage(S, A):
    """``Pi1 D^{-1} A`` as a dense t1 x d array."""
    A = MatrixHandle.wrap(A)
    if A.n != S.n:
        raise SketchError(f"sketch expects {S.n} rows, input has {A.n}")
    if S.bucket is None:
        if A.is_sparse:
            out = np.zeros(A.shape)
            out[A.rows, A.cols] = A.vals * S.diag_inv[A.rows]
            return out
        return A.dense * S.diag_inv[:, None]
    weight = S.signs * S.diag_inv
    t1 = S.dims[1]
    if A.is_sparse:
        return kernels.countsketch_coo(A.rows, A.cols, A.vals, S.bucket, weight, t1, A.d)
    return kernels.countsketch_dense(A.dense, S.bucket, weight, t1)


def apply_sketch(S, A):
    """``Pi2 Pi1 D^{-1} A``. One-dimensional input gives one-dimensional output."""
    vector = isinstance(A, np.ndarray) and A.ndim == 1
    if isinstance(A, (list, tuple)):
        A = np.asarray(A, dtype=float)
        vector = A.ndim == 1
    Y = apply_first_stage(S, A)
    if S.gauss is not None:
        Y = S.gauss @ Y
    return Y[:, 0] if vector else Y


@dataclass(frozen=True)
class L2toL1Map:
    """``B = sqrt(pi/2)/t3 * Q`` with Q a t3 x t2 standard Gaussian."""

    matrix: np.ndarray
    dims: tuple
    scale: float

    def __call__(self, x):
        return self.matrix @ x


def l2_to_l1_dim(t2, c3=DEFAULT_C3):
    return math.ceil(c3 * t2 * math.log2(t2 + 1))


def build_l2_to_l1(t2, c3=DEFAULT_C3, rng=None, t3=None):
    if t2 < 1:
        raise SketchError("source dimension must be positive")
    rng = as_generator(rng)
    t3 = l2_to_l1_dim(t2, c3) if t3 is None else int(t3)
    scale = math.sqrt(math.pi / 2.0) / t3
    q = rng.standard_normal((t3, t2))
    return L2toL1Map(scale * q, (t2, t3), scale)
