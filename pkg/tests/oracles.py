"""Independent reference computations for the tests.

Nothing here imports the package's numerics. The M-estimator formulas are
re-typed from their textbook forms, normalizers come from scipy root finding,
and the norm is a plain brentq solve.
"""
import itertools
import math

import numpy as np
from scipy import optimize, stats


def raw_f(kind, param):
    """Raw M-estimator f on [0, inf)."""
    if kind == "power":
        return lambda t: t ** param
    if kind == "huber":
        c = param
        return lambda t: t * t / 2 if t <= c else c * (t - c / 2)
    if kind == "l1l2":
        return lambda t: 2 * (math.sqrt(1 + t * t / 2) - 1)
    if kind == "fair":
        c = param
        return lambda t: c * c * (t / c - math.log(1 + t / c))
    if kind == "l15":
        dl = param
        return lambda t: t ** 1.5 / 1.5 if t <= dl else math.sqrt(dl) * (t - dl / 3)
    raise ValueError(kind)


def normalized_G(kind, param):
    """Scalar G with G = f(N x) on [0, 1], linear past 1 with the left slope."""
    f = raw_f(kind, param)
    N = optimize.brentq(lambda t: f(t) - 1.0, 1e-9, 1e3, xtol=1e-15, rtol=1e-15)
    h = 1e-6
    # convex f: left difference quotient at N, refined by Richardson
    d1 = (f(N) - f(N - h)) / h
    d2 = (f(N) - f(N - h / 2)) / (h / 2)
    s = N * (2 * d2 - d1)

    def G(x):
        x = abs(x)
        return f(N * x) if x <= 1 else s * x + (1 - s)

    return G, N, s


def norm_by_root(G, x):
    """alpha with sum G(|x_i| / alpha) = 1, via brentq."""
    x = np.abs(np.asarray(x, dtype=float))
    if not x.any():
        return 0.0
    lo, hi = x.max() * (1 - 1e-12), x.sum() * (1 + 1e-12) + 1e-300

    def phi(a):
        return sum(G(v / a) for v in x) - 1.0

    return optimize.brentq(phi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def raw_norm(kind, param, x):
    """Orlicz norm induced by the unnormalized f, for the normalization check."""
    f = raw_f(kind, param)
    x = np.abs(np.asarray(x, dtype=float))

    def phi(a):
        return sum(f(v / a) for v in x) - 1.0

    hi = 1.0
    while phi(hi) > 0:
        hi *= 2
    lo = hi
    while phi(lo) < 0:
        lo /= 2
    return optimize.brentq(phi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def l1_by_enumeration(M, y):
    """Exact l1 regression optimum: some optimum interpolates d rows."""
    t, d = M.shape
    best = math.inf
    best_x = None
    for rows in itertools.combinations(range(t), d):
        sub = M[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, y[list(rows)])
        val = np.abs(M @ x - y).sum()
        if val < best:
            best, best_x = val, x
    return best_x, best


def als_rank_constrained(C, Dm, M, k, restarts, rng, iters=300):
    """min ||C X Y Dm - M||_F by alternating least squares from random starts.

    All restarts advance together as one stack of small problems.
    """
    s = Dm.shape[0]
    Cp = np.linalg.pinv(C)
    Dp = np.linalg.pinv(Dm)
    Y = rng.standard_normal((restarts, k, s))
    for _ in range(iters):
        # X-step: C X (Y Dm) ~ M
        X = Cp @ M @ np.linalg.pinv(Y @ Dm)
        # Y-step: (C X) Y Dm ~ M
        Y = np.linalg.pinv(C @ X) @ M @ Dp
    res = np.linalg.norm(C @ X @ Y @ Dm - M, axis=(1, 2))
    return float(res.min())


def ks_against_cdf(samples, cdf):
    return stats.kstest(samples, cdf).statistic


def central_difference_grad(fun, r, step):
    g = np.empty_like(r)
    for i in range(r.size):
        e = np.zeros_like(r)
        e[i] = step
        g[i] = (fun(r + e) - fun(r - e)) / (2 * step)
    return g


def d1_l1_success_probability(b, factor, draws, rng):
    """P(l1 loss of the D^{-1}-weighted mean <= factor * optimum) for A = ones.

    With G = |t| the diagonal draws are u = E, E ~ Exp(1), and the weighted
    least-squares fit of a constant is sum(b / u^2) / sum(1 / u^2).
    """
    b = np.asarray(b, dtype=float)
    opt = np.abs(b - np.median(b)).sum()
    u = rng.standard_exponential((draws, b.size))
    w = 1.0 / u ** 2
    x = (w * b).sum(axis=1) / w.sum(axis=1)
    loss = np.abs(x[:, None] - b).sum(axis=1)
    return float(np.mean(loss <= factor * opt))
