"""Exact Euclidean projection onto the antenna spacing/aperture polytope.

The feasible set {x : x[i+1] - x[i] >= d, x[-1] - x[0] <= D} is written as
U x <= l with n rows: n-1 difference rows and one aperture row.  Projection
uses a primal active-set method; with an identity Hessian each subproblem is
a tiny least-squares solve, and any proper subset of the rows of U is
linearly independent, so the working-set Gram matrix never degenerates.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from .errors import IterationCap, SingularActiveGram


def chain_constraints(n: int, d: float, aperture: float) -> Tuple[np.ndarray, np.ndarray]:
    """Constraint matrix U and bound l_u with U x <= l_u."""
    u = np.zeros((n, n))
    idx = np.arange(n - 1)
    u[idx, idx] = 1.0
    u[idx, idx + 1] = -1.0
    u[n - 1, n - 1] = 1.0
    u[n - 1, 0] = -1.0
    l_u = np.full(n, -d)
    l_u[n - 1] = aperture
    return u, l_u


def feasible_start(target: np.ndarray, d: float, aperture: float) -> np.ndarray:
    """A feasible point near the target: a minimum-spacing ULA at its centroid."""
    n = target.size
    ula = d * np.arange(n, dtype=float)
    return ula + (target.mean() - ula.mean())


def project_chain(
    target, d: float, aperture: float, x0=None, max_iter: int = 0,
) -> np.ndarray:
    """Euclidean projection of `target` onto the spacing/aperture polytope."""
    t = np.asarray(target, dtype=float)
    u, l_u = chain_constraints(t.size, d, aperture)
    x = feasible_start(t, d, aperture) if x0 is None else np.asarray(x0, dtype=float)
    return _active_set_projection(t, u, l_u, x, max_iter or 50 * (t.size + 1))


def _solve_working(t, u_w, l_w):
    """Equality-constrained projection onto {u_w x = l_w} and its multipliers."""
    if u_w.shape[0] == 0:
        return t.copy(), np.zeros(0)
    gram = u_w @ u_w.T
    try:
        lam = np.linalg.solve(gram, u_w @ t - l_w)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - excluded by LICQ
        raise SingularActiveGram(str(exc)) from exc
    return t - u_w.T @ lam, lam


def _active_set_projection(t, u, l_u, x, max_iter: int) -> np.ndarray:
    n_rows = u.shape[0]
    residual = l_u - u @ x
    working = [k for k in range(n_rows) if residual[k] <= 1e-12]
    if len(working) == n_rows:
        # All rows sum to zero, so the aperture row is implied: drop it.
        working.remove(n_rows - 1)

    for _ in range(max_iter):
        u_w = u[working]
        x_eq, lam = _solve_working(t, u_w, l_u[working])
        step = x_eq - x
        if np.linalg.norm(step, np.inf) <= 1e-13:
            if lam.size == 0 or lam.min() >= -1e-12:
                return x_eq
            working.pop(int(np.argmin(lam)))
            continue
        # Ratio test against rows outside the working set.
        alpha = 1.0
        blocker = -1
        u_step = u @ step
        for k in range(n_rows):
            if k in working or u_step[k] <= 1e-14:
                continue
            a_k = (l_u[k] - u[k] @ x) / u_step[k]
            if a_k < alpha:
                alpha = max(a_k, 0.0)
                blocker = k
        x = x + alpha * step
        if blocker >= 0:
            working.append(blocker)
            working.sort()
            if len(working) == n_rows:
                working.remove(n_rows - 1)
    raise IterationCap("active-set projection failed to terminate")


def projection_kkt_residual(x, target, d: float, aperture: float) -> float:
    """Max-norm KKT residual of a candidate projection (test instrumentation)."""
    t = np.asarray(target, dtype=float)
    x = np.asarray(x, dtype=float)
    u, l_u = chain_constraints(t.size, d, aperture)
    slack = l_u - u @ x
    primal = max(0.0, float((-slack).max()))
    # Multipliers from the tight rows via least squares on stationarity.
    tight = slack <= 1e-8
    if tight.all():
        tight[-1] = False
    u_t = u[tight]
    if u_t.shape[0]:
        lam, *_ = np.linalg.lstsq(u_t.T, t - x, rcond=None)
        stationarity = float(np.linalg.norm(x - t + u_t.T @ lam, np.inf))
        dual = max(0.0, float((-lam).max()))
        comp = float(np.abs(lam * slack[tight]).max())
    else:
        stationarity = float(np.linalg.norm(x - t, np.inf))
        dual = comp = 0.0
    return max(primal, stationarity, dual, comp)
