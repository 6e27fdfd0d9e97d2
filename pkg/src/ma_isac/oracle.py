"""Independent brute-force references used to certify the main solvers.

Everything here is deliberately dumb: exhaustive grids over the feasible
polytopes, central finite differences, and a dual projected-gradient QP.
None of it shares numerical kernels with the solvers it checks beyond the
objective evaluators themselves.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import GridTooLarge, IterationCap
from .params import SystemParams
from .projection import chain_constraints
from .receive_opt import spread_metric
from .transmit_los import g_objective


@dataclass(frozen=True)
class GridSpec:
    """Resolution and size budget of a brute-force scan."""

    step: float
    max_points: int = 2_000_000

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")


def _count_monotone_tuples(n_free: int, slots: int) -> int:
    # Nondecreasing (n_free)-tuples over {0..slots} == C(slots + n_free, n_free).
    return math.comb(slots + n_free, n_free)


def _feasible_grid_iter(n: int, d: float, aperture: float, step: float):
    """Yield integer grid tuples for feasible increasing vectors anchored at 0.

    Positions are k*step with k_0 = 0; consecutive gaps at least ceil(d/step)
    units and total span at most floor(aperture/step) units.  Anchoring the
    first element costs nothing because both objectives served here are
    translation invariant.
    """
    gap_units = math.ceil(d / step - 1e-12)
    span_units = math.floor(aperture / step + 1e-12)
    slots = span_units - (n - 1) * gap_units
    if slots < 0:
        return
    base = np.arange(n) * gap_units
    for combo in itertools.combinations_with_replacement(range(slots + 1), n - 1):
        yield base + np.concatenate([[0], combo])


def _grid_budget(n: int, d: float, aperture: float, spec: GridSpec) -> int:
    gap_units = math.ceil(d / spec.step - 1e-12)
    span_units = math.floor(aperture / spec.step + 1e-12)
    slots = span_units - (n - 1) * gap_units
    if slots < 0:
        return 0
    count = _count_monotone_tuples(n - 1, slots)
    if count > spec.max_points:
        raise GridTooLarge(f"grid would hold {count} points (cap {spec.max_points})")
    return count


def _batched_scan(
    n: int, d: float, aperture: float, spec: GridSpec,
    batch_eval: Callable[[np.ndarray], np.ndarray],
) -> Tuple[np.ndarray, float]:
    _grid_budget(n, d, aperture, spec)
    best_val = -np.inf
    best = None
    batch: list = []
    for units in _feasible_grid_iter(n, d, aperture, spec.step):
        batch.append(units)
        if len(batch) == 8192:
            best, best_val = _flush(batch, spec.step, batch_eval, best, best_val)
            batch = []
    if batch:
        best, best_val = _flush(batch, spec.step, batch_eval, best, best_val)
    if best is None:
        raise GridTooLarge("empty feasible grid")
    return best, float(best_val)


def _flush(batch, step, batch_eval, best, best_val):
    pts = np.asarray(batch, dtype=float) * step
    vals = batch_eval(pts)
    i = int(np.argmax(vals))
    if vals[i] > best_val:
        return pts[i], float(vals[i])
    return best, best_val


def grid_search_rx(params: SystemParams, grid: GridSpec | None = None) -> Tuple[np.ndarray, float]:
    """Exhaustive spread-metric maximization over the receive polytope."""
    grid = grid or GridSpec(step=1.0 / 20.0)

    def eval_batch(pts: np.ndarray) -> np.ndarray:
        return (pts**2).sum(axis=1) - pts.sum(axis=1) ** 2 / pts.shape[1]

    return _batched_scan(params.n_rx, params.d_min, params.aperture_rx, grid, eval_batch)


def grid_search_tx_los(
    params: SystemParams, theta_t1: float, theta: float | None = None,
    grid: GridSpec | None = None,
) -> Tuple[np.ndarray, float]:
    """Exhaustive phasor-sum maximization over the transmit polytope."""
    grid = grid or GridSpec(step=1.0 / 50.0)
    theta = params.target_angle if theta is None else theta
    s = np.sin(theta_t1) + np.sin(theta)

    def eval_batch(pts: np.ndarray) -> np.ndarray:
        return np.abs(np.exp(-2j * np.pi * s * pts).sum(axis=1))

    return _batched_scan(params.n_tx, params.d_min, params.aperture_tx, grid, eval_batch)


def lipschitz_estimate(
    fn: Callable[[np.ndarray], float], samples: np.ndarray, h: float = 1e-5
) -> float:
    """Max sampled gradient norm of fn, for honest grid-slack accounting."""
    worst = 0.0
    for x in samples:
        worst = max(worst, float(np.linalg.norm(fd_gradient(fn, x, h))))
    return worst


def grid_slack(lipschitz: float, step: float, n: int) -> float:
    """Value a continuous optimum can lose to nearest-grid rounding."""
    return lipschitz * step * np.sqrt(n)


def fd_gradient(fn: Callable[[np.ndarray], float], x, h: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar field over positions."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        grad[i] = (fn(x + step) - fn(x - step)) / (2.0 * h)
    return grad


def qp_reference(
    delta: float, linear, d: float, aperture: float,
    tol: float = 1e-8, max_iter: int = 400_000,
) -> np.ndarray:
    """Reference solver for max -delta/2 x^T x + linear^T x on the polytope.

    Works on the dual of the equivalent projection problem with plain
    projected-gradient ascent (clipping at zero); independent of the primal
    active-set machinery it cross-checks.
    """
    linear = np.asarray(linear, dtype=float)
    if delta <= 0:
        raise ValueError("need a strictly concave objective")
    t = linear / delta
    u, l_u = chain_constraints(t.size, d, aperture)
    gram = u @ u.T
    step = 1.0 / float(np.linalg.eigvalsh(gram)[-1])
    lam = np.zeros(u.shape[0])
    rhs = u @ t - l_u
    for it in range(max_iter):
        lam = np.maximum(lam + step * (rhs - gram @ lam), 0.0)
        if it % 64 == 0:
            x = t - u.T @ lam
            slack = l_u - u @ x
            if max(0.0, float((-slack).max())) < tol and float(
                np.abs(lam * slack).max()
            ) < tol:
                return x
    raise IterationCap("dual projected gradient did not reach KKT tolerance")
