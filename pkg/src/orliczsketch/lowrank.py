"""Entrywise-lp low-rank approximation by sketching both sides of A."""
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .matrix import MatrixHandle
from .orlicz import make_orlicz
from .randgen import SeedSpec, as_seedspec, sample_p_stable
from .sketch import DEFAULT_C1, DEFAULT_C2, DEFAULT_C3, apply_sketch, build_orlicz_sketch


class LowRankError(ValueError):
    pass


@dataclass
class LowRankFactors:
    U: np.ndarray
    V: np.ndarray
    k: int
    p: float
    loss_p: float
    wall_time: float = 0.0

    @property
    def product(self):
        return self.U @ self.V


def _check_p(p):
    p = float(p)
    if not 1.0 <= p <= 2.0:
        raise LowRankError(f"p must lie in [1, 2], got {p}")
    return p


def entrywise_lp(A, p):
    """``(sum |A_ij|^p)^(1/p)`` over stored entries."""
    p = _check_p(p)
    A = MatrixHandle.wrap(A)
    vals = A.vals if A.is_sparse else A.dense.ravel()
    if p == 2.0:
        return float(np.linalg.norm(vals))
    return float((np.abs(vals) ** p).sum() ** (1.0 / p))


def lp_loss(A, U, V, p):
    """``||UV - A||_p^p``."""
    R = U @ V - MatrixHandle.wrap(A).to_dense()
    return float((np.abs(R) ** _check_p(p)).sum())


def _orth_range(X, tol=1e-12):
    """Orthonormal basis for the column space of X."""
    u, s, _ = np.linalg.svd(X, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return u[:, :0]
    return u[:, s > tol * s[0]]


def rank_constrained_ls(C, Dm, M, k):
    """``argmin ||C X Y Dm - M||_F`` over X (r x k), Y (k x s).

    Project M onto col(C) and row(Dm), truncate to rank k, then pull back
    through the pseudoinverses and split the product by SVD.
    """
    C = np.asarray(C, dtype=float)
    Dm = np.asarray(Dm, dtype=float)
    M = np.asarray(M, dtype=float)
    r, s = C.shape[1], Dm.shape[0]
    if not 1 <= k <= min(r, s):
        raise LowRankError(f"k={k} must lie in [1, min(r, s)={min(r, s)}]")
    qc = _orth_range(C)
    qd = _orth_range(Dm.T).T
    P = qc.T @ M @ qd.T
    pu, ps, pvt = np.linalg.svd(P, full_matrices=False)
    kk = min(k, ps.size)
    Pk = (pu[:, :kk] * ps[:kk]) @ pvt[:kk]
    Z = np.linalg.pinv(C, rcond=1e-12) @ qc @ Pk @ qd @ np.linalg.pinv(Dm, rcond=1e-12)
    zu, zs, zvt = np.linalg.svd(Z, full_matrices=False)
    root = np.sqrt(zs[:k])
    X = np.zeros((r, k))
    Y = np.zeros((k, s))
    X[:, :root.size] = zu[:, :k] * root
    Y[:root.size] = root[:, None] * zvt[:k]
    return X, Y


def _dims_theoretical(k, n):
    t1 = min(n, math.ceil(DEFAULT_C1 * k * k))
    t2 = min(t1, math.ceil(DEFAULT_C2 * k))
    t3 = math.ceil(DEFAULT_C3 * k * math.ceil(math.log2(k + 1)))
    return t1, t2, t3


def _right(X, sk):
    """``X @ sk^T`` for a column-side sketch ``sk``."""
    return apply_sketch(sk, MatrixHandle.wrap(X).transpose()).T


def lp_lowrank(A, k, p=1.0, variant="experimental", seed=0):
    """Rank-k factors ``U (n x k)``, ``V (k x d)`` for entrywise-lp loss.

    ``variant="theoretical"``: S and T1 are exponential-diagonal composites
    on the rows (t1 = 10k^2, t2 = 20k), R and T2 are d x t3 p-stable with
    t3 = 8k ceil(log2(k+1)). ``variant="experimental"`` swaps the roles:
    S (4k x n) and T1 (32k x n) are dense Cauchy and R, T2 are exponential
    composites applied from the column side.
    """
    start = time.perf_counter()
    p = _check_p(p)
    A = MatrixHandle.wrap(A)
    n, d = A.shape
    if not 1 <= k <= min(n, d):
        raise LowRankError(f"k={k} must lie in [1, min(n, d)={min(n, d)}]")
    spec = as_seedspec(seed)
    g = make_orlicz("power", p)

    if variant == "theoretical":
        t1, t2, t3 = _dims_theoretical(k, n)
        S = build_orlicz_sketch(g, n, k, rng=spec.generator(0), t1=t1, t2=t2)
        T1 = build_orlicz_sketch(g, n, k, rng=spec.generator(1), t1=t1, t2=t2)
        R = sample_p_stable(p, spec.generator(2), d * t3).reshape(d, t3)
        T2 = sample_p_stable(p, spec.generator(3), d * t3).reshape(d, t3)
        SA = apply_sketch(S, A)
        T1A = apply_sketch(T1, A)
        AR = A @ R
        T1AR, SAT2, T1AT2 = T1A @ R, SA @ T2, T1A @ T2
    elif variant == "experimental":
        t1 = 4 * k
        t2 = 8 * t1
        inner = min(d, math.ceil(DEFAULT_C1 * k * k))
        S = spec.generator(0).standard_cauchy((t1, n))
        T1 = spec.generator(1).standard_cauchy((t2, n))
        R = build_orlicz_sketch(g, d, 1, rng=spec.generator(2), t1=inner, t2=t1)
        T2 = build_orlicz_sketch(g, d, 1, rng=spec.generator(3), t1=inner, t2=t2)
        SA = A.rmatmul(S)
        T1A = A.rmatmul(T1)
        AR = _right(A, R)
        T1AR, SAT2, T1AT2 = _right(T1A, R), _right(SA, T2), _right(T1A, T2)
    else:
        raise LowRankError(f"unknown variant {variant!r}")

    X, Y = rank_constrained_ls(T1AR, SAT2, T1AT2, k)
    U = AR @ X
    V = Y @ SA
    return LowRankFactors(U, V, k, p, lp_loss(A, U, V, p), time.perf_counter() - start)


def lp_lowrank_best(A, k, p=1.0, variant="experimental", seed=0, restarts=50, threads=1):
    """Best of ``restarts`` independent runs; restart i uses substream i.

    Restarts may run on a thread pool. Ties go to the lowest restart index,
    so the result does not depend on ``threads``.
    """
    if restarts < 1:
        raise LowRankError("restarts must be positive")
    spec = as_seedspec(seed)
    A = MatrixHandle.wrap(A)
    seeds = [SeedSpec(spec.seed, spec.stream * 100_003 + i) for i in range(restarts)]

    def run(s):
        return lp_lowrank(A, k, p, variant, s)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(run, seeds))
    else:
        outs = [run(s) for s in seeds]
    return min(outs, key=lambda o: o.loss_p)


def pca_baseline(A, k, p=1.0):
    """Projection onto the top-k singular subspace, scored in entrywise lp."""
    A = MatrixHandle.wrap(A)
    if not 1 <= k <= min(A.shape):
        raise LowRankError("k must lie in [1, min(n, d)]")
    u, s, vt = np.linalg.svd(A.to_dense(), full_matrices=False)
    U = u[:, :k] * s[:k]
    V = vt[:k]
    return LowRankFactors(U, V, k, _check_p(p), lp_loss(A, U, V, p))
