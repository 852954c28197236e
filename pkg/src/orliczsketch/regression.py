"""Sketched regression solvers.

``orlicz_regress`` embeds ``||Ax - b||_G`` into l2 and solves the sketched
least-squares problem. ``combined_regress`` maps each term of
``sum_i ||A_i x - b_i||_{G_i}`` into l1 and solves one stacked l1 problem.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .matrix import MatrixHandle
from .orlicz import make_orlicz, orlicz_norm
from .randgen import as_seedspec
from .sketch import (DEFAULT_C1, DEFAULT_C2, DEFAULT_C3, apply_sketch,
                     build_l2_to_l1, build_orlicz_sketch)

RCOND = 1e-12
PASSTHROUGH_MAX_ROWS = 5000


class RegressionError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    """Raised for rank-deficient sketches and diverging solvers."""


@dataclass
class RegressionOutput:
    solution: np.ndarray
    loss: float
    sketch_dims: tuple
    seed: object
    wall_time: float = field(default=0.0, compare=False)
    reseeded: bool = False


@dataclass
class CombinedTerm:
    g: object
    A: object
    b: np.ndarray

    def __post_init__(self):
        self.A = MatrixHandle.wrap(self.A)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.b.size != self.A.n:
            raise RegressionError(f"term has {self.A.n} rows but b has {self.b.size}")


def _svd_solve(M, y):
    u, s, vt = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(M.shape[1]), 0
    keep = s > RCOND * s[0]
    coef = (u[:, keep].T @ y) / s[keep]
    return vt[keep].T @ coef, int(keep.sum())


def least_squares(M, y):
    """Minimum-norm ``M^+ y``; singular values under 1e-12 * s_max count as 0."""
    M = np.asarray(M, dtype=float)
    y = np.asarray(y, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(y))):
        raise RegressionError("least_squares input has non-finite entries")
    return _svd_solve(M, y)[0]


def _numeric_rank(M):
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > RCOND * s[0]).sum()) if s.size and s[0] > 0 else 0


def _use_passthrough(mode, n):
    if mode == "auto":
        return n <= PASSTHROUGH_MAX_ROWS
    if mode in ("diag", "passthrough"):
        return True
    if mode == "full":
        return False
    raise RegressionError(f"unknown sketch mode {mode!r}")


def orlicz_regress(g, A, b, seed=0, mode="auto", c1=DEFAULT_C1, c2=DEFAULT_C2):
    """Approximately minimize ``||Ax - b||_G`` over x.

    ``mode`` is ``auto`` (diagonal-only for n <= 5000, full sketch above),
    ``diag`` or ``full``. If the sketched matrix loses rank the sketch is
    redrawn once from the next substream.
    """
    start = time.perf_counter()
    A = MatrixHandle.wrap(A)
    b = np.asarray(b, dtype=float).ravel()
    n, d = A.shape
    if b.size != n:
        raise RegressionError(f"A has {n} rows but b has {b.size}")
    if n < d:
        raise RegressionError(f"need n >= d, got n={n}, d={d}")
    spec = as_seedspec(seed)
    passthrough = _use_passthrough(mode, n)

    for attempt in range(2):
        S = build_orlicz_sketch(g, n, d, c1, c2, spec.generator(attempt),
                                passthrough=passthrough)
        SA = apply_sketch(S, A)
        Sb = apply_sketch(S, b)
        x, rank = _svd_solve(SA, Sb)
        if rank == d:
            break
    else:
        raise NumericalFailure("sketched matrix is rank deficient after one reseed")

    loss = orlicz_norm(g, A @ x - b)
    dims = (S.dims[1], S.dims[2])
    return RegressionOutput(x, loss, dims, spec, time.perf_counter() - start,
                            reseeded=attempt > 0)


def l1_regress(M, y, tol=None, max_iter=200, polish=True):
    """Minimize ``||Mx - y||_1`` by smoothed IRLS.

    Weights are ``1/max(|r_i|, eps)`` with eps halved every iteration from
    ``1e-2 max|y|`` to 1e-10. IRLS can stall next to a vertex, so by default
    the result is finished by an exact descent over vertices (an l1 optimum
    interpolates d rows); the refined point is kept only if it is better.
    """
    M = np.asarray(M, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if M.ndim == 1:
        M = M[:, None]
    t, d = M.shape
    if t < d:
        raise RegressionError(f"l1_regress needs t >= d, got t={t}, d={d}")
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(y))):
        raise RegressionError("l1_regress input has non-finite entries")
    ymax = np.abs(y).max() if y.size else 0.0
    if tol is None:
        tol = 1e-9 * np.abs(y).sum()

    x = _svd_solve(M, y)[0]
    obj = np.abs(M @ x - y).sum()
    best_x, best_obj = x, obj
    eps = max(1e-2 * ymax, 1e-10)
    increases = 0
    for _ in range(max_iter):
        r = M @ x - y
        w = np.sqrt(1.0 / np.maximum(np.abs(r), eps))
        x = _svd_solve(M * w[:, None], y * w)[0]
        new_obj = np.abs(M @ x - y).sum()
        if new_obj < best_obj:
            best_x, best_obj = x, new_obj
        improvement = obj - new_obj
        increases = increases + 1 if improvement < 0 else 0
        if increases >= 5:
            raise NumericalFailure("IRLS objective increased 5 iterations in a row")
        obj = new_obj
        at_floor = eps <= 1e-10
        eps = max(0.5 * eps, 1e-10)
        if at_floor and 0 <= improvement < tol:
            break

    if polish and t >= d:
        best_x, best_obj = _basis_polish(M, y, best_x, best_obj)
    return best_x


def _start_basis(M, r):
    """d row indices, smallest |r| first, whose rows are independent."""
    d = M.shape[1]
    basis = []
    for i in np.argsort(np.abs(r), kind="stable"):
        trial = basis + [int(i)]
        if _numeric_rank(M[trial]) == len(trial):
            basis = trial
            if len(basis) == d:
                return basis
    return None


def _weighted_median(tau, w):
    order = np.argsort(tau, kind="stable")
    cw = np.cumsum(w[order])
    k = int(np.searchsorted(cw, 0.5 * cw[-1]))
    return order[min(k, order.size - 1)]


def _basis_polish(M, y, x, obj, max_pivots=None):
    """Edge-walk from the vertex nearest ``x`` until no edge descends.

    At a vertex d residuals vanish. Releasing one of them gives an edge
    ``x + tau v``; the objective along it is minimized exactly at a weighted
    median of the residual breakpoints, which is the adjacent vertex.
    """
    t, d = M.shape
    basis = _start_basis(M, M @ x - y)
    if basis is None:
        return x, obj
    xv = np.linalg.solve(M[basis], y[basis])
    fv = np.abs(M @ xv - y).sum()
    max_pivots = max_pivots or 50 * d + 100
    for _ in range(max_pivots):
        binv = np.linalg.inv(M[basis])
        r = M @ xv - y
        moved = False
        for j in range(d):
            mv = M @ binv[:, j]
            live = np.abs(mv) > 1e-14 * np.abs(mv).max()
            idx = np.flatnonzero(live)
            tau = -r[idx] / mv[idx]
            pick = idx[_weighted_median(tau, np.abs(mv[idx]))]
            if pick in basis:
                continue
            step = -r[pick] / mv[pick]
            cand = xv + step * binv[:, j]
            fc = np.abs(M @ cand - y).sum()
            if fc < fv * (1.0 - 1e-15):
                basis[j] = int(pick)
                xv, fv = cand, fc
                moved = True
                break
        if not moved:
            break
    if fv <= obj:
        return xv, fv
    return x, obj


def combined_loss(terms, x):
    return float(sum(orlicz_norm(t.g, t.A @ x - t.b) for t in terms))


def combined_regress(terms, seed=0, mode="auto", c1=DEFAULT_C1, c2=DEFAULT_C2,
                     c3=DEFAULT_C3, l1_opts=None):
    """Approximately minimize ``sum_i ||A_i x - b_i||_{G_i}``.

    Term i is sketched with ``B_i Pi2_i Pi1_i D_i^{-1}`` drawn from its own
    substream, so adding a term never changes the sketches of the others.
    The stacked sketched system is solved in l1.
    """
    start = time.perf_counter()
    terms = list(terms)
    if not terms:
        raise RegressionError("combined_regress needs at least one term")
    d = terms[0].A.d
    if any(t.A.d != d for t in terms):
        raise RegressionError("all terms must share the column count d")
    spec = as_seedspec(seed)
    l1_opts = dict(l1_opts or {})

    for attempt in range(2):
        blocks, rhs, dims = [], [], []
        for i, term in enumerate(terms):
            n_i = term.A.n
            rng = spec.generator(attempt, i)
            passthrough = _use_passthrough(mode, n_i)
            S = build_orlicz_sketch(term.g, n_i, min(d, n_i), c1, c2, rng,
                                    passthrough=passthrough)
            B = build_l2_to_l1(S.out_dim, c3, rng)
            blocks.append(B(apply_sketch(S, term.A)))
            rhs.append(B(apply_sketch(S, term.b)))
            dims.append((S.dims[1], S.dims[2], B.dims[1]))
        M = np.vstack(blocks)
        y = np.concatenate(rhs)
        live = np.any(M != 0, axis=1) | (y != 0)
        M, y = M[live], y[live]
        if M.shape[0] >= d and _numeric_rank(M) == d:
            break
    else:
        raise NumericalFailure("stacked sketch is rank deficient after one reseed")

    x = l1_regress(M, y, **l1_opts)
    loss = combined_loss(terms, x)
    return RegressionOutput(x, loss, tuple(dims), spec, time.perf_counter() - start,
                            reseeded=attempt > 0)


def lasso(A, b, lam, seed=0, **opts):
    """``min ||Ax - b||_2 + lam * ||x||_1`` through the combined solver."""
    if lam < 0:
        raise RegressionError("lambda must be nonnegative")
    A = MatrixHandle.wrap(A)
    d = A.d
    terms = [
        CombinedTerm(make_orlicz("power", 2), A, b),
        CombinedTerm(make_orlicz("power", 1), lam * np.eye(d), np.zeros(d)),
    ]
    return combined_regress(terms, seed=seed, **opts)
