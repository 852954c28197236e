"""Gradient-descent reference solver for ``min_x ||Ax - b||_G``."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..matrix import MatrixHandle
from ..orlicz import orlicz_norm, orlicz_norm_and_gradient
from ..regression import least_squares

log = logging.getLogger(__name__)

MAX_DENSE = 10 ** 7


@dataclass
class OracleResult:
    x: np.ndarray
    loss: float
    iterations: int
    converged: bool
    history: list


def oracle_solve(g, A, b, lr=0.001, stop=1e-7, max_iter=100_000, max_halvings=30,
                 keep_history=False, x0=None):
    """Plain gradient descent from the least-squares solution.

    A step that raises the loss is retried with half the step, up to
    ``max_halvings`` times, so the loss sequence never increases. Stops when
    a step gains less than ``stop``.
    """
    A = MatrixHandle.wrap(A)
    if A.n * A.d > MAX_DENSE:
        raise ValueError("oracle_solve is for desk-scale problems (n*d <= 1e7)")
    M = A.to_dense()
    b = np.asarray(b, dtype=float).ravel()
    x = least_squares(M, b) if x0 is None else np.array(x0, dtype=float)
    r = M @ x - b
    history = []
    if not np.any(r):
        return OracleResult(x, 0.0, 0, True, [0.0] if keep_history else history)
    loss, gvec = orlicz_norm_and_gradient(g, r)
    if keep_history:
        history.append(loss)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = M.T @ gvec
        step = lr
        for _ in range(max_halvings + 1):
            x_new = x - step * grad
            r_new = M @ x_new - b
            if not np.any(r_new):
                new_loss, g_new = 0.0, None
                break
            new_loss, g_new = orlicz_norm_and_gradient(g, r_new)
            if new_loss <= loss:
                break
            step *= 0.5
        else:
            converged = True
            break
        gain = loss - new_loss
        x, loss, gvec = x_new, new_loss, g_new
        if keep_history:
            history.append(loss)
        if g_new is None or gain < stop:
            converged = True
            break
    if not converged:
        log.warning("oracle_solve hit max_iter=%d with loss %.6g", max_iter, loss)
    return OracleResult(x, float(loss), it, converged, history)


def approximation_ratio(g, A, b, x_hat, oracle=None, clamp=True, **oracle_opts):
    """``||A x_hat - b||_G / min_x ||Ax - b||_G``.

    Ratios a hair under 1 come from the oracle's stopping tolerance and
    are clamped to 1 unless ``clamp`` is false; the shortfall is logged.
    A zero optimum with a nonzero ``x_hat`` loss gives ``inf``.
    """
    A = MatrixHandle.wrap(A)
    if oracle is None:
        oracle = oracle_solve(g, A, b, **oracle_opts)
    ours = orlicz_norm(g, A @ np.asarray(x_hat) - np.asarray(b, dtype=float))
    if oracle.loss == 0.0:
        return 1.0 if ours == 0.0 else math.inf
    ratio = ours / oracle.loss
    if ratio < 1.0 and clamp:
        log.info("approximation ratio %.12g below 1 by %.3g; clamped", ratio, 1.0 - ratio)
        return 1.0
    return ratio
