"""Boundary-traversal solvers for transmit placement under a single-path channel.

With one departure path the transmit objective collapses to the modulus of a
sum of unit phasors g(x) = |sum_i exp(-j 2 pi s x_i)| with s = sin(aod) +
sin(target).  Its maximizers either align all phasors (needs enough aperture)
or sit on the boundary of the spacing polytope.  Each candidate active set of
spacing/aperture constraints is reduced to a smaller phasor-alignment problem
with effective coefficients r_i, whose unique maximum is known in closed form;
searching the active sets breadth-first (all subsets, layer by layer) yields
the global optimum, and depth-first along a random insertion order yields a
linear-cost local optimum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateCoefficient, NoFeasibleBoundary
from .params import GEOM_TOL, SystemParams
from .receive_opt import ulah_positions

TWO_PI = 2.0 * np.pi

# |r_i| below this has no usable phase; the active set is skipped.
COEFF_TOL = 1e-12

# Guard against ceil() overshooting when its argument is an exact integer.
CEIL_TOL = 1e-10


def g_objective(x, theta_t1: float, theta: float) -> float:
    """Phasor-sum modulus |sum_i exp(-j 2 pi (sin aod + sin theta) x_i)|."""
    x = np.asarray(x, dtype=float)
    s = np.sin(theta_t1) + np.sin(theta)
    return float(abs(np.exp(-1j * TWO_PI * s * x).sum()))


@dataclass(frozen=True)
class ReducedProblem:
    """Active-set reduction of the phasor problem to its free block leaders.

    Constraint indices are 0-based: index i < n_tx-1 is the gap constraint
    x[i+1] - x[i] >= d, index n_tx-1 is the aperture constraint.  Each leader
    carries `n_after` antennas glued at spacing d behind it; in the aperture-
    active case the trailing `anchored_count` antennas ride at fixed offsets
    below x[0] + aperture and their phasors are absorbed into r[0].
    """

    active: Tuple[int, ...]
    leaders: Tuple[int, ...]
    n_after: np.ndarray
    r: np.ndarray
    case: str                 # "I" (aperture slack) or "II" (aperture active)
    anchored_count: int       # antennas anchored to the far rail end (case II)
    s_abs: float
    d: float
    aperture: float

    @property
    def n_free(self) -> int:
        return len(self.leaders)

    @property
    def aligned_value(self) -> float:
        """Objective at the aligned optimum, the sum of coefficient moduli."""
        return float(np.abs(self.r).sum())


def _unit_run_sum(count: int, s_abs: float, d: float) -> complex:
    """Sum of `count` phasors spaced d apart: sum_p exp(-j 2 pi s p d)."""
    p = np.arange(count)
    return complex(np.exp(-1j * TWO_PI * s_abs * p * d).sum())


def reduce_active_set(
    active: Sequence[int], n_tx: int, d: float, aperture: float, s_abs: float
) -> ReducedProblem:
    """Fold the active constraints into effective coefficients r_i.

    Raises DegenerateCoefficient when a needed coefficient has vanished
    (exact phasor cancellation inside a block), since its phase is undefined.
    """
    active = tuple(sorted(int(i) for i in active))
    if any(i < 0 or i >= n_tx for i in active):
        raise ValueError("constraint index out of range")
    if len(set(active)) != len(active):
        raise ValueError("duplicate constraint index")
    if len(active) > n_tx - 1:
        raise ValueError("a full active set collapses the polytope to the ULA")

    gap_set = {i for i in active if i < n_tx - 1}
    aperture_active = (n_tx - 1) in active

    anchored_count = 0
    n_free_antennas = n_tx
    if aperture_active:
        run = 0
        while (n_tx - 2 - run) in gap_set:
            run += 1
        anchored_count = run + 1
        n_free_antennas = n_tx - anchored_count
        gap_set -= set(range(n_tx - 1 - run, n_tx - 1))

    leaders = [j for j in range(n_free_antennas) if j == 0 or (j - 1) not in gap_set]
    n_after = np.zeros(len(leaders), dtype=int)
    for i, lead in enumerate(leaders):
        while (lead + n_after[i]) in gap_set:
            n_after[i] += 1
    assert len(leaders) == n_tx - len(active), "block accounting is off"

    r = np.array(
        [_unit_run_sum(n_after[i] + 1, s_abs, d) for i in range(len(leaders))],
        dtype=complex,
    )
    if aperture_active:
        j = np.arange(anchored_count)
        r[0] += np.exp(-1j * TWO_PI * s_abs * (aperture - j * d)).sum()

    if len(leaders) > 1 and np.any(np.abs(r) < COEFF_TOL):
        raise DegenerateCoefficient(
            f"vanishing coefficient for active set {active}: |r|={np.abs(r)}"
        )
    return ReducedProblem(
        active=active,
        leaders=tuple(leaders),
        n_after=n_after,
        r=r,
        case="II" if aperture_active else "I",
        anchored_count=anchored_count,
        s_abs=s_abs,
        d=d,
        aperture=aperture,
    )


def min_k(reduced: ReducedProblem) -> np.ndarray:
    """Smallest integer phase wraps giving spacing-feasible aligned leaders."""
    if reduced.n_free < 2:
        return np.zeros(0, dtype=int)
    dphase = np.diff(np.angle(reduced.r))
    need = reduced.s_abs * (reduced.n_after[:-1] + 1) * reduced.d
    return np.ceil(need - dphase / TWO_PI - CEIL_TOL).astype(int)


def aligned_positions(reduced: ReducedProblem, k: np.ndarray) -> np.ndarray:
    """Leader positions putting every phasor r_i e^{-j 2 pi s x'_i} in line."""
    if reduced.n_free == 1:
        return np.zeros(1)
    dphase = np.diff(np.angle(reduced.r))
    steps = (k + dphase / TWO_PI) / reduced.s_abs
    return np.concatenate([[0.0], np.cumsum(steps)])


def min_aperture(reduced: ReducedProblem, k: np.ndarray) -> float:
    """Smallest aperture admitting the aligned placement for this active set."""
    span = aligned_positions(reduced, k)[-1]
    d_min = span + reduced.n_after[-1] * reduced.d
    if reduced.case == "II":
        d_min += reduced.anchored_count * reduced.d
    return float(d_min)


def expand_positions(x_prime: np.ndarray, reduced: ReducedProblem) -> np.ndarray:
    """Rebuild the full antenna vector from leader positions."""
    n_tx = len(reduced.active) + reduced.n_free
    out = np.empty(n_tx)
    for i, lead in enumerate(reduced.leaders):
        for p in range(reduced.n_after[i] + 1):
            out[lead + p] = x_prime[i] + p * reduced.d
    for j in range(reduced.anchored_count):
        out[n_tx - 1 - j] = x_prime[0] + reduced.aperture - j * reduced.d
    return out


def reduced_gradient(reduced: ReducedProblem, x_prime: np.ndarray) -> np.ndarray:
    """Gradient of the squared reduced objective at leader positions x'.

    Vanishes at any aligned placement; used for the stationarity check of the
    boundary-search winners.
    """
    rho = np.abs(reduced.r)
    beta = np.angle(reduced.r) - TWO_PI * reduced.s_abs * x_prime
    diff = beta[:, None] - beta[None, :]
    dE2_dbeta = -2.0 * (rho[:, None] * rho[None, :] * np.sin(diff)).sum(axis=1)
    return dE2_dbeta * (-TWO_PI * reduced.s_abs)


def reduced_hessian(reduced: ReducedProblem, x_prime: np.ndarray) -> np.ndarray:
    """Hessian of the squared reduced objective in leader coordinates."""
    rho = np.abs(reduced.r)
    beta = np.angle(reduced.r) - TWO_PI * reduced.s_abs * x_prime
    diff = beta[:, None] - beta[None, :]
    cos = np.cos(diff)
    hess_beta = 2.0 * (rho[:, None] * rho[None, :]) * cos
    np.fill_diagonal(hess_beta, -2.0 * ((rho[:, None] * rho[None, :] * cos).sum(axis=1) - rho**2))
    return hess_beta * (TWO_PI * reduced.s_abs) ** 2


@dataclass(frozen=True)
class LosSolution:
    """Output of a boundary-traversal run."""

    apv: np.ndarray
    objective: float
    active_set: Tuple[int, ...]
    d_min_used: float
    layer: int
    n_evaluated: int
    skipped: Tuple[Tuple[int, ...], ...] = ()
    fallback: bool = False
    seed: Optional[int] = None


def _phase_degenerate_solution(params: SystemParams) -> LosSolution:
    # sin(aod) + sin(target) == 0 makes every phase vanish: g == n_tx anywhere.
    x = ulah_positions(params.n_tx, params.d_min)
    return LosSolution(
        apv=x,
        objective=float(params.n_tx),
        active_set=tuple(range(params.n_tx - 1)),
        d_min_used=(params.n_tx - 1) * params.d_min,
        layer=0,
        n_evaluated=0,
    )


def _ulah_fallback(
    params: SystemParams, theta_t1: float, theta: float, n_evaluated: int,
    skipped: Tuple[Tuple[int, ...], ...], seed: Optional[int] = None
) -> LosSolution:
    x = ulah_positions(params.n_tx, params.d_min)
    return LosSolution(
        apv=x,
        objective=g_objective(x, theta_t1, theta),
        active_set=tuple(range(params.n_tx - 1)),
        d_min_used=(params.n_tx - 1) * params.d_min,
        layer=params.n_tx - 1,
        n_evaluated=n_evaluated,
        skipped=skipped,
        fallback=True,
        seed=seed,
    )


def _solve_active_set(
    active: Sequence[int], params: SystemParams, s_abs: float
) -> Tuple[ReducedProblem, np.ndarray, float]:
    reduced = reduce_active_set(
        active, params.n_tx, params.d_min, params.aperture_tx, s_abs
    )
    k = min_k(reduced)
    return reduced, k, min_aperture(reduced, k)


def _finish(
    reduced: ReducedProblem, k: np.ndarray, theta_t1: float, theta: float,
    d_min: float, layer: int, n_evaluated: int,
    skipped: Tuple[Tuple[int, ...], ...], seed: Optional[int] = None
) -> LosSolution:
    x = expand_positions(aligned_positions(reduced, k), reduced)
    return LosSolution(
        apv=x,
        objective=g_objective(x, theta_t1, theta),
        active_set=reduced.active,
        d_min_used=d_min,
        layer=layer,
        n_evaluated=n_evaluated,
        skipped=skipped,
        seed=seed,
    )


def bt_bfs(
    params: SystemParams, theta_t1: float, theta: Optional[float] = None,
    extra_layers: int = 1,
) -> LosSolution:
    """Breadth-first boundary traversal; returns the global maximizer of g.

    Layers of active sets are enumerated by size.  After the first layer that
    produces a feasible improvement, `extra_layers` further layers are still
    searched before stopping: aperture-active sets can beat smaller sets one
    layer deeper, which the plain best-layer rule would miss.
    """
    theta = params.target_angle if theta is None else theta
    s_abs = abs(np.sin(theta_t1) + np.sin(theta))
    if s_abs < 1e-12:
        return _phase_degenerate_solution(params)

    skipped: list = []
    reduced0, k0, d_min0 = _solve_active_set((), params, s_abs)
    if d_min0 <= params.aperture_tx + GEOM_TOL:
        # Fully aligned placement fits: g = n_tx is the unconstrained maximum.
        return _finish(reduced0, k0, theta_t1, theta, d_min0, 0, 0, ())

    best = None
    best_g = 0.0
    n_evaluated = 0  # counts boundary active sets only, not the layer-0 check
    extra_remaining: Optional[int] = None
    for c in range(1, params.n_tx):
        for combo in itertools.combinations(range(params.n_tx), c):
            n_evaluated += 1
            try:
                reduced, k, d_min = _solve_active_set(combo, params, s_abs)
            except DegenerateCoefficient:
                skipped.append(combo)
                continue
            if d_min <= params.aperture_tx + GEOM_TOL and reduced.aligned_value > best_g:
                best = (reduced, k, d_min, c)
                best_g = reduced.aligned_value
        if extra_remaining is not None:
            extra_remaining -= 1
            if extra_remaining <= 0:
                break
        elif best is not None:
            extra_remaining = extra_layers
    if best is None:
        return _ulah_fallback(params, theta_t1, theta, n_evaluated, tuple(skipped))
    reduced, k, d_min, layer = best
    return _finish(
        reduced, k, theta_t1, theta, d_min, layer, n_evaluated, tuple(skipped)
    )


def bt_dfs(
    params: SystemParams, theta_t1: float, theta: Optional[float] = None,
    order_seed: int = 0,
) -> LosSolution:
    """Depth-first boundary traversal along a seeded random constraint order.

    Activates one constraint per layer until the aligned placement fits the
    aperture, evaluating at most n_tx active sets.  Local optimum only.
    """
    theta = params.target_angle if theta is None else theta
    s_abs = abs(np.sin(theta_t1) + np.sin(theta))
    if s_abs < 1e-12:
        return _phase_degenerate_solution(params)

    skipped: list = []
    reduced0, k0, d_min0 = _solve_active_set((), params, s_abs)
    if d_min0 <= params.aperture_tx + GEOM_TOL:
        return _finish(reduced0, k0, theta_t1, theta, d_min0, 0, 0, (), seed=order_seed)

    rng = np.random.Generator(np.random.Philox(key=order_seed))
    order = rng.permutation(params.n_tx)
    active: list = []
    n_evaluated = 0
    for c in range(1, params.n_tx):
        active.append(int(order[c - 1]))
        n_evaluated += 1
        try:
            reduced, k, d_min = _solve_active_set(active, params, s_abs)
        except DegenerateCoefficient:
            skipped.append(tuple(sorted(active)))
            continue
        if d_min <= params.aperture_tx + GEOM_TOL:
            return _finish(
                reduced, k, theta_t1, theta, d_min, c, n_evaluated,
                tuple(skipped), seed=order_seed,
            )
    return _ulah_fallback(
        params, theta_t1, theta, n_evaluated, tuple(skipped), seed=order_seed
    )
