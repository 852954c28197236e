"""Pure-NumPy kernels.

Same call signatures as the compiled ``_kernels`` extension. This module is
used when the extension is not built, and as the reference the compiled
kernels are tested against.

Family codes: 0 power, 1 huber, 2 l1-l2, 3 fair, 4 l1.5-huber. Each kernel
receives ``(kind, prm, nrm, slope)``: the family code, its single shape
parameter, the normalizer f^{-1}(1) and the tail slope.
"""
import numpy as np

POWER, HUBER, L1L2, FAIR, L15 = 0, 1, 2, 3, 4


def log1p_gap(u):
    """u - log(1 + u) without cancellation for small u >= 0."""
    u = np.asarray(u, dtype=float)
    small = u < 1e-2
    us = np.where(small, u, 0.0)
    series = us * us * (0.5 - us * (1.0 / 3 - us * (0.25 - us * (0.2 - us * (
        1.0 / 6 - us * (1.0 / 7 - us / 8))))))
    with np.errstate(invalid="ignore"):
        direct = u - np.log1p(u)
    return np.where(small, series, direct)


def family_eval(x, kind, prm, nrm, slope):
    """Normalized G evaluated elementwise on |x|."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    tail = x > 1.0
    out[tail] = slope * x[tail] + (1.0 - slope)
    h = x[~tail]
    if kind == POWER:
        v = h ** prm
    else:
        t = nrm * h
        if kind == HUBER:
            v = np.where(t <= prm, 0.5 * t * t, prm * (t - 0.5 * prm))
        elif kind == L1L2:
            v = t * t / (np.sqrt(1.0 + 0.5 * t * t) + 1.0)
        elif kind == FAIR:
            v = prm * prm * log1p_gap(t / prm)
        elif kind == L15:
            v = np.where(t <= prm, t ** 1.5 / 1.5, np.sqrt(prm) * (t - prm / 3.0))
        else:
            raise ValueError(f"unknown family code {kind}")
    out[~tail] = v
    return out


def family_deriv(x, kind, prm, nrm, slope):
    """Right derivative of G at |x|."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    tail = x >= 1.0
    out[tail] = slope
    h = x[~tail]
    if kind == POWER:
        if prm == 1.0:
            v = np.ones_like(h)
        else:
            v = prm * h ** (prm - 1.0)
    else:
        t = nrm * h
        if kind == HUBER:
            v = nrm * np.minimum(t, prm)
        elif kind == L1L2:
            v = nrm * t / np.sqrt(1.0 + 0.5 * t * t)
        elif kind == FAIR:
            v = nrm * prm * t / (prm + t)
        elif kind == L15:
            v = nrm * np.sqrt(np.minimum(t, prm))
        else:
            raise ValueError(f"unknown family code {kind}")
    out[~tail] = v
    return out


def norm_callable(x, geval, rtol=1e-12, maxiter=200):
    """Orlicz norm of ``x`` for an arbitrary vectorized ``geval``.

    Bisection on [max|x|, sum|x|], finished by one false-position step
    inside the final bracket.
    """
    a = np.abs(np.asarray(x, dtype=float))
    lo = a.max() if a.size else 0.0
    if lo == 0.0:
        return 0.0
    hi = a.sum()
    flo = geval(a / lo).sum() - 1.0
    if flo <= 0.0:
        return float(lo)
    fhi = geval(a / hi).sum() - 1.0
    if fhi >= 0.0:
        return float(hi)
    for _ in range(maxiter):
        if hi - lo <= rtol * lo:
            break
        mid = 0.5 * (lo + hi)
        fm = geval(a / mid).sum() - 1.0
        if fm > 0.0:
            lo, flo = mid, fm
        elif fm < 0.0:
            hi, fhi = mid, fm
        else:
            return float(mid)
    est = lo + flo * (hi - lo) / (flo - fhi)
    return float(min(max(est, lo), hi))


def orlicz_norm(x, kind, prm, nrm, slope, rtol=1e-12, maxiter=200):
    return norm_callable(
        x, lambda v: family_eval(v, kind, prm, nrm, slope), rtol, maxiter
    )


def grad_callable(r, geval, gderiv, rtol=1e-12, maxiter=200):
    """Norm value and subgradient at a nonzero ``r``."""
    r = np.asarray(r, dtype=float)
    alpha = norm_callable(r, geval, rtol, maxiter)
    a = np.abs(r)
    gp = gderiv(a / alpha)
    denom = np.dot(gp, a)
    return alpha, alpha * gp * np.sign(r) / denom


def orlicz_norm_grad(r, kind, prm, nrm, slope, rtol=1e-12, maxiter=200):
    return grad_callable(
        r,
        lambda v: family_eval(v, kind, prm, nrm, slope),
        lambda v: family_deriv(v, kind, prm, nrm, slope),
        rtol,
        maxiter,
    )


def countsketch_coo(rows, cols, vals, bucket, weight, t, d):
    """out[bucket[i], j] += weight[i] * v for every triplet (i, j, v)."""
    flat = bucket[rows] * d + cols
    acc = np.bincount(flat, weights=weight[rows] * vals, minlength=t * d)
    return acc.reshape(t, d)


def countsketch_dense(A, bucket, weight, t):
    """Row i of ``A`` scaled by weight[i] and added into row bucket[i]."""
    n, d = A.shape
    out = np.zeros((t, d))
    np.add.at(out, bucket, A * weight[:, None])
    return out
