"""Normalized Orlicz functions and the norms they induce.

An Orlicz function ``G`` here is convex and even, with ``G(0) = 0`` and
``G(1) = 1``, and it is linear past 1 with slope ``tail_slope``. The M-estimator
families (Huber, l1-l2, Fair and an l1.5/linear hybrid) are normalized from
their raw form ``f`` via ``G(x) = f(f^{-1}(1) x)`` on [0, 1].
"""
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize, special

from . import _kernels_py as _ref
from ._backend import kernels

FAMILIES = ("power", "huber", "l1l2", "fair", "l15", "custom")
_CODES = {"power": _ref.POWER, "huber": _ref.HUBER, "l1l2": _ref.L1L2,
          "fair": _ref.FAIR, "l15": _ref.L15}

NORM_RTOL = 1e-12
NORM_MAXITER = 200


class OrliczError(ValueError):
    pass


# raw M-estimators f and their inverses on [0, inf)

def _huber(t, c):
    return np.where(t <= c, 0.5 * t * t, c * (t - 0.5 * c))


def _huber_inv(y, c):
    return np.where(y <= 0.5 * c * c, np.sqrt(2.0 * y), y / c + 0.5 * c)


def _l1l2(t, _=None):
    return t * t / (np.sqrt(1.0 + 0.5 * t * t) + 1.0)


def _l1l2_inv(y, _=None):
    return np.sqrt(2.0 * y + 0.5 * y * y)


def _fair(t, c):
    return c * c * _ref.log1p_gap(t / c)


def _fair_inv(y, c):
    # u - log(1 + u) = z  <=>  1 + u = -W_{-1}(-exp(-1 - z)). W loses
    # precision near the branch point, so small z starts from the series
    # inversion instead; Newton polishes both.
    y = np.asarray(y, dtype=float)
    z = y / (c * c)
    with np.errstate(over="ignore", invalid="ignore"):
        u = -np.real(special.lambertw(-np.exp(-1.0 - z), k=-1)) - 1.0
    u = np.where(z < 1e-2, np.sqrt(2.0 * z) + 2.0 * z / 3.0, u)
    for _ in range(4):
        g = _ref.log1p_gap(u) - z
        gp = u / (1.0 + u)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(gp > 0, g / gp, 0.0)
        u = np.maximum(u - step, 0.0)
    return c * np.where(z > 0, u, 0.0)


def _l15(t, delta):
    return np.where(t <= delta, t ** 1.5 / 1.5, np.sqrt(delta) * (t - delta / 3.0))


def _l15_inv(y, delta):
    knee = delta ** 1.5 / 1.5
    return np.where(y <= knee, (1.5 * y) ** (2.0 / 3.0), y / np.sqrt(delta) + delta / 3.0)


_RAW = {
    "huber": (_huber, _huber_inv),
    "l1l2": (_l1l2, _l1l2_inv),
    "fair": (_fair, _fair_inv),
    "l15": (_l15, _l15_inv),
}


def _invert_increasing(func, y, hi):
    """Vectorized bisection for ``func(x) = y`` on [0, hi]."""
    y = np.asarray(y, dtype=float)
    lo_b = np.zeros_like(y)
    hi_b = np.full_like(y, hi)
    for _ in range(200):
        mid = 0.5 * (lo_b + hi_b)
        below = func(mid) < y
        lo_b = np.where(below, mid, lo_b)
        hi_b = np.where(below, hi_b, mid)
        if np.all(hi_b - lo_b <= 1e-15 * np.maximum(hi_b, 1e-300)):
            break
    return 0.5 * (lo_b + hi_b)


@dataclass(frozen=True)
class OrliczFunction:
    """A normalized Orlicz function with property P.

    Use :func:`make_orlicz` rather than constructing this directly.
    """

    kind: str
    param: Optional[float]
    normalizer: float
    tail_slope: float
    growth_constant: float = field(default=np.nan, compare=False)
    raw: Optional[Callable] = field(default=None, repr=False, compare=False)
    raw_inverse: Optional[Callable] = field(default=None, repr=False, compare=False)

    @property
    def kernel_args(self):
        """``(code, param, normalizer, slope)`` for the compiled kernels, or
        None for custom functions."""
        if self.kind == "custom":
            return None
        prm = self.param if self.param is not None else 0.0
        return (_CODES[self.kind], float(prm), float(self.normalizer),
                float(self.tail_slope))

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        args = self.kernel_args
        if args is not None:
            return _ref.family_eval(x, *args)
        x = np.abs(np.asarray(x, dtype=float))
        s = self.tail_slope
        with np.errstate(invalid="ignore", over="ignore"):
            inner = self.raw(self.normalizer * np.minimum(x, 1.0))
        return np.where(x > 1.0, s * x + (1.0 - s), inner)

    def deriv(self, x):
        """Right derivative of G at |x|."""
        args = self.kernel_args
        if args is not None:
            return _ref.family_deriv(x, *args)
        x = np.abs(np.asarray(x, dtype=float))
        h = 1e-7
        lo = np.minimum(x, 1.0 - h)
        inner = (self.eval(lo + h) - self.eval(lo)) / h
        return np.where(x >= 1.0, self.tail_slope, inner)

    def inverse(self, y):
        """G^{-1} on [0, inf)."""
        y = np.asarray(y, dtype=float)
        if np.any(y < 0):
            raise OrliczError("G^{-1} is defined on [0, inf)")
        s = self.tail_slope
        inner_y = np.minimum(y, 1.0)
        if self.kind == "power":
            inner = inner_y ** (1.0 / self.param)
        elif self.raw_inverse is not None:
            inner = self.raw_inverse(inner_y) / self.normalizer
        else:
            inner = _invert_increasing(self.eval, inner_y, 1.0)
        return np.where(y > 1.0, (y - 1.0) / s + 1.0, inner)


def make_orlicz(kind, param=None, *, f=None, f_inverse=None):
    """Build a normalized Orlicz function.

    ``kind`` is one of ``power`` (``param`` = p in [1, 2]), ``huber``
    (``param`` = delta), ``l1l2`` (no parameter), ``fair`` (``param`` = c),
    ``l15`` (``param`` = delta) or ``custom``, which takes a raw convex
    ``f`` with f(0) = 0 and optionally its inverse.
    """
    if kind not in FAMILIES:
        raise OrliczError(f"unknown Orlicz family {kind!r}")
    if kind == "power":
        if param is None:
            raise OrliczError("power family needs an exponent p")
        p = float(param)
        if not 1.0 <= p <= 2.0:
            raise OrliczError(f"power exponent must lie in [1, 2], got {p}")
        g = OrliczFunction("power", p, 1.0, p)
    elif kind == "custom":
        if f is None:
            raise OrliczError("custom family needs a raw function f")
        nrm = float(optimize.brentq(lambda t: float(f(t)) - 1.0, 0.0,
                                    _bracket_level(f)))
        g0 = OrliczFunction("custom", None, nrm, 1.0, raw=f, raw_inverse=f_inverse)
        h = 1e-7
        slope = float((g0.eval(1.0) - g0.eval(1.0 - h)) / h)
        g = OrliczFunction("custom", None, nrm, slope, raw=f, raw_inverse=f_inverse)
    else:
        raw, raw_inv = _RAW[kind]
        if kind == "l1l2":
            prm = None
        else:
            if param is None:
                raise OrliczError(f"{kind} family needs a positive parameter")
            prm = float(param)
            if not (prm > 0 and np.isfinite(prm)):
                raise OrliczError(f"{kind} parameter must be positive, got {param}")
        nrm = float(raw_inv(1.0, prm))
        # s is the left derivative at 1, i.e. the largest difference quotient
        # of a convex function on [0, 1].
        slope = float(nrm * _left_raw_slope(kind, nrm, prm))
        g = OrliczFunction(kind, prm, nrm, slope,
                            raw=lambda t, _p=prm, _f=raw: _f(t, _p),
                            raw_inverse=lambda y, _p=prm, _fi=raw_inv: _fi(y, _p))
    cg = _estimate_growth_constant(g, 200)
    return _with_growth(g, cg)


def _bracket_level(f):
    hi = 1.0
    while float(f(hi)) < 1.0:
        hi *= 2.0
        if hi > 1e12:
            raise OrliczError("custom f never reaches 1")
    return hi


def _left_raw_slope(kind, t, prm):
    if kind == "huber":
        return min(t, prm)
    if kind == "l1l2":
        return t / np.sqrt(1.0 + 0.5 * t * t)
    if kind == "fair":
        return prm * t / (prm + t)
    return np.sqrt(min(t, prm))


def _with_growth(g, cg):
    return OrliczFunction(g.kind, g.param, g.normalizer, g.tail_slope, cg,
                          g.raw, g.raw_inverse)


def _log_grid(size):
    return np.geomspace(1e-6, 10.0, size)


def _estimate_growth_constant(g, size):
    x = _log_grid(size)
    gx = g.eval(x)
    # ratio[i, j] = G(y_j) x_i^2 / (G(x_i) y_j^2) for x_i < y_j
    ratio = np.outer(x * x / gx, gx / (x * x))
    iu = np.triu_indices(size, k=1)
    return float(max(1.0, ratio[iu].max()))


def _check_finite(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise OrliczError("input vector has non-finite entries")
    return x


def _pow2_scale(x):
    """Split x as 2**e * y with max|y| in [0.5, 1); exact, and keeps 1/alpha
    finite for subnormal inputs."""
    top = np.abs(x).max() if x.size else 0.0
    if top == 0.0:
        return 0, x
    e = int(np.frexp(top)[1])
    return e, np.ldexp(x, -e)


def orlicz_norm(g, x, rtol=NORM_RTOL, maxiter=NORM_MAXITER):
    """||x||_G: the alpha solving sum G(|x_i| / alpha) = 1 (0 for x = 0)."""
    e, y = _pow2_scale(_check_finite(x).ravel())
    args = g.kernel_args
    if args is None:
        alpha = _ref.norm_callable(y, g.eval, rtol, maxiter)
    else:
        alpha = kernels.orlicz_norm(y, *args, rtol, maxiter)
    return float(np.ldexp(alpha, e))


def orlicz_norm_gradient(g, r, rtol=NORM_RTOL, maxiter=NORM_MAXITER):
    """Subgradient of ``x -> ||x||_G`` at a nonzero ``r``."""
    return orlicz_norm_and_gradient(g, r, rtol, maxiter)[1]


def orlicz_norm_and_gradient(g, r, rtol=NORM_RTOL, maxiter=NORM_MAXITER):
    r = _check_finite(r).ravel()
    if not np.any(r):
        raise OrliczError("the Orlicz norm is not differentiable at 0")
    # the gradient is scale-invariant, only alpha needs the factor back
    e, y = _pow2_scale(r)
    args = g.kernel_args
    if args is None:
        alpha, grad = _ref.grad_callable(y, g.eval, g.deriv, rtol, maxiter)
    else:
        alpha, grad = kernels.orlicz_norm_grad(y, *args, rtol, maxiter)
    return float(np.ldexp(alpha, e)), grad


@dataclass
class PropertyReport:
    """Grid diagnostics for property P. Constants are estimates only."""

    monotone: bool
    convex: bool
    normalized: bool
    even: bool
    linear_tail: bool
    subquadratic: bool
    growth_constant: float
    decompose_constant: float
    grid_size: int

    @property
    def passed(self):
        return all((self.monotone, self.convex, self.normalized, self.even,
                    self.linear_tail, self.subquadratic))


def verify_property_P(g, grid_size=400):
    """Check conditions 1-3 and 5 on a log grid in (1e-6, 10]."""
    if grid_size < 100:
        raise OrliczError("grid_size must be at least 100")
    x = _log_grid(grid_size)
    gx = g.eval(x)
    tol = 1e-12
    monotone = bool(np.all(np.diff(gx) >= -tol))
    slopes = np.diff(gx) / np.diff(x)
    convex = bool(np.all(np.diff(slopes) >= -1e-9 * np.maximum(1.0, np.abs(slopes[1:]))))
    normalized = bool(abs(g.eval(0.0)) <= tol and abs(g.eval(1.0) - 1.0) <= tol)
    even = bool(np.array_equal(g.eval(-x), gx))
    tail = x[x > 1.0]
    s = g.tail_slope
    linear_tail = bool(np.allclose(g.eval(tail), s * tail + (1.0 - s), rtol=1e-13, atol=0))
    cg = _estimate_growth_constant(g, grid_size)
    subquadratic = bool(np.isfinite(cg))

    a = x[:, None]
    b = x[None, :]
    mask = a * b <= 1.0
    gab = g.eval(np.where(mask, a * b, 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mask & (gab > 0), np.outer(gx, gx) / gab, 0.0)
    alpha_hat = float(ratio.max())
    return PropertyReport(monotone, convex, normalized, even, linear_tail,
                          subquadratic, cg, alpha_hat, grid_size)
