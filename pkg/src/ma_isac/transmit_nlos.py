"""MM and projected-gradient solvers for transmit placement under multipath.

The directional response p1(x) = |h(x)^H a(x)|^2 is maximized by iterating a
concave quadratic minorant whose exact solution is a Euclidean projection
onto the spacing polytope.  If the SNR-feasibility threshold is never
reached, the residual problem (minimizing the angle sum p2 = upsilon + phi)
is attacked by Rosen's gradient projection, warm-started from the MM iterate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .beamforming import optimal_beamformer
from .errors import DegenerateArg, Infeasible, SingularActiveGram
from .params import ChannelPaths, SystemParams
from .projection import chain_constraints, project_chain
from .receive_opt import ulah_positions
from .signal_model import TWO_PI, CrbValue, channel, crb_simplified, steering

# Rows within this of their bound count as active in the projection step.
ACTIVE_ROW_TOL = 1e-9

# Armijo rule constants (the step-size rule itself is standard; these values
# are configuration, not derived quantities).
ARMIJO_SIGMA = 1e-4
ARMIJO_BACKTRACK = 0.5
ARMIJO_MAX_BACKTRACKS = 50


def _alphas(paths: ChannelPaths, theta: float) -> np.ndarray:
    return TWO_PI * (np.sin(paths.aods) + np.sin(theta))


def _psi(x, paths: ChannelPaths, theta: float) -> np.ndarray:
    """Per-path phasor sums psi_p = sum_i exp(-j alpha_p x_i)."""
    x = np.asarray(x, dtype=float)
    return np.exp(-1j * np.outer(_alphas(paths, theta), x)).sum(axis=1)


def p1(x, paths: ChannelPaths, theta: float) -> float:
    """Directional response |h^H a|^2, evaluated as psi^H Sigma psi."""
    return float(abs(np.vdot(paths.gains, _psi(x, paths, theta))) ** 2)


def p1_direct(x, paths: ChannelPaths, theta: float) -> float:
    """Same response from the raw channel/steering product (test route)."""
    return float(abs(np.vdot(channel(x, paths), steering(x, theta))) ** 2)


def sp1_threshold(params: SystemParams) -> float:
    """Feasibility level of the SNR constraint in terms of p1."""
    return params.n_tx * params.snr_threshold * params.noise_comm / params.power_budget


@dataclass(frozen=True)
class SurrogateState:
    """First-order model of p1 at an expansion point, with curvature bound.

    The model bar_p1(x) = Re{z^H psi(x)} with z = Sigma psi(x^i) has a
    diagonal Hessian; delta1 bounds its entries for every x, so the quadratic
    minorant bar_p1(x^i) + grad^T (x - x^i) - delta1/2 ||x - x^i||^2 is global.
    """

    x_ref: np.ndarray
    z: np.ndarray
    grad: np.ndarray
    delta1: float
    alphas: np.ndarray

    def value(self, x) -> float:
        """bar_p1(x) = Re{z^H psi(x)} for the frozen z."""
        x = np.asarray(x, dtype=float)
        psi = np.exp(-1j * np.outer(self.alphas, x)).sum(axis=1)
        return float(np.vdot(self.z, psi).real)

    def hessian_diag(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        b = self.z.real[:, None]
        q = self.z.imag[:, None]
        ax = self.alphas[:, None] * x[None, :]
        a2 = (self.alphas**2)[:, None]
        return (-b * a2 * np.cos(ax) + q * a2 * np.sin(ax)).sum(axis=0)


def surrogate(x_ref, paths: ChannelPaths, theta: float) -> SurrogateState:
    """Build the MM expansion of p1 at x_ref."""
    x_ref = np.asarray(x_ref, dtype=float)
    alphas = _alphas(paths, theta)
    psi_ref = _psi(x_ref, paths, theta)
    # z = Sigma psi with Sigma = sigma sigma^H, i.e. sigma (sigma^H psi).
    z = paths.gains * np.vdot(paths.gains, psi_ref)
    b = z.real[:, None]
    q = z.imag[:, None]
    ax = alphas[:, None] * x_ref[None, :]
    al = alphas[:, None]
    grad = (-b * al * np.sin(ax) - q * al * np.cos(ax)).sum(axis=0)
    delta1 = float((np.sqrt(z.real**2 + z.imag**2) * alphas**2).sum())
    return SurrogateState(x_ref=x_ref, z=z, grad=grad, delta1=delta1, alphas=alphas)


def solve_qp_step(x_ref, surr: SurrogateState, params: SystemParams) -> np.ndarray:
    """Exact maximizer of the quadratic minorant over the spacing polytope.

    Completing the square turns the subproblem into the projection of
    x_ref + grad/delta1 onto the feasible region.
    """
    x_ref = np.asarray(x_ref, dtype=float)
    if surr.delta1 <= 1e-300:
        return x_ref.copy()
    target = x_ref + surr.grad / surr.delta1
    return project_chain(target, params.d_min, params.aperture_tx, x0=x_ref)


@dataclass(frozen=True)
class MmResult:
    status: str  # "feasible" | "not_found" | "iteration_cap"
    x: np.ndarray
    p1_value: float
    iterations: int
    p1_trace: np.ndarray

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def mm_sp1(
    x0, paths: ChannelPaths, params: SystemParams, theta: Optional[float] = None,
    eps1: float = 1e-3, max_iter: int = 500,
) -> MmResult:
    """Search for an SNR-feasible placement by monotonically driving up p1.

    Returns as soon as an iterate clears the feasibility threshold; otherwise
    reports the converged (or capped) iterate so the caller can fall through
    to the residual problem.
    """
    theta = params.target_angle if theta is None else theta
    threshold = sp1_threshold(params)
    x = np.asarray(x0, dtype=float).copy()
    value = p1(x, paths, theta)
    trace = [value]
    if value > threshold:
        return MmResult("feasible", x, value, 0, np.array(trace))
    for it in range(1, max_iter + 1):
        surr = surrogate(x, paths, theta)
        x = solve_qp_step(x, surr, params)
        new_value = p1(x, paths, theta)
        trace.append(new_value)
        if new_value > threshold:
            return MmResult("feasible", x, new_value, it, np.array(trace))
        if abs(new_value - value) < eps1:
            return MmResult("not_found", x, new_value, it, np.array(trace))
        value = new_value
    return MmResult("iteration_cap", x, value, max_iter, np.array(trace))


def _h_norm_sq(x, paths: ChannelPaths) -> float:
    h = channel(x, paths)
    return float(np.vdot(h, h).real)


def p2(x, paths: ChannelPaths, params: SystemParams, theta: Optional[float] = None) -> float:
    """Angle sum arccos sqrt(p1/(n ||h||^2)) + arcsin sqrt(need/(P ||h||^2))."""
    theta = params.target_angle if theta is None else theta
    x = np.asarray(x, dtype=float)
    hsq = _h_norm_sq(x, paths)
    need = params.snr_threshold * params.noise_comm
    if hsq <= 0.0 or need > params.power_budget * hsq * (1.0 + 1e-9):
        raise Infeasible("SNR target unreachable at these positions")
    u_arg = min(max(p1(x, paths, theta) / (params.n_tx * hsq), 0.0), 1.0)
    v_arg = min(max(need / (params.power_budget * hsq), 0.0), 1.0)
    return float(np.arccos(np.sqrt(u_arg)) + np.arcsin(np.sqrt(v_arg)))


def grad_p2(
    x, paths: ChannelPaths, params: SystemParams, theta: Optional[float] = None,
    endpoint_tol: float = 1e-12,
) -> np.ndarray:
    """Analytic gradient of p2 via the chain rule through p1 and ||h||^2."""
    theta = params.target_angle if theta is None else theta
    x = np.asarray(x, dtype=float)
    n_t = params.n_tx
    need = params.snr_threshold * params.noise_comm

    alphas = _alphas(paths, theta)
    phasors = np.exp(-1j * np.outer(alphas, x))       # L_t x N_t
    psi = phasors.sum(axis=1)
    w_val = np.vdot(paths.gains, psi)                 # sigma^H psi
    p1_val = float(abs(w_val) ** 2)
    dw = (np.conj(paths.gains)[:, None] * (-1j * alphas[:, None]) * phasors).sum(axis=0)
    p1_grad = 2.0 * (np.conj(w_val) * dw).real

    gammas = TWO_PI * np.sin(paths.aods)
    hk = (paths.gains[:, None] * np.exp(1j * np.outer(gammas, x))).sum(axis=0)
    dhk = (paths.gains[:, None] * (1j * gammas[:, None])
           * np.exp(1j * np.outer(gammas, x))).sum(axis=0)
    hsq = float((np.abs(hk) ** 2).sum())
    hsq_grad = 2.0 * (np.conj(hk) * dhk).real

    if hsq <= 0.0:
        raise Infeasible("zero channel")
    arccos_radicand = n_t * hsq * p1_val - p1_val**2
    arcsin_slack = params.power_budget * hsq - need
    scale = max(n_t * hsq, 1.0) ** 2
    if arccos_radicand <= endpoint_tol * scale or arcsin_slack <= endpoint_tol * scale:
        raise DegenerateArg(
            "inverse-trig argument at domain endpoint; gradient unbounded"
        )
    term_cos = (p1_val * hsq_grad / (2.0 * hsq) - p1_grad / 2.0) / np.sqrt(arccos_radicand)
    term_sin = -np.sqrt(need / arcsin_slack) * hsq_grad / (2.0 * hsq)
    return term_cos + term_sin


@dataclass(frozen=True)
class RgpResult:
    x: np.ndarray
    p2_value: float
    iterations: int
    converged: bool
    status: str
    # Accepted-step instrumentation: iterates, their p2 values, and the
    # Armijo sufficient-decrease bound each step had to meet.
    x_trace: Tuple[np.ndarray, ...] = ()
    p2_trace: Tuple[float, ...] = ()
    armijo_bounds: Tuple[float, ...] = ()


def _projector(rows: np.ndarray) -> np.ndarray:
    n = rows.shape[1]
    if rows.shape[0] == 0:
        return np.eye(n)
    gram = rows @ rows.T
    try:
        inv = np.linalg.inv(gram)
    except np.linalg.LinAlgError as exc:
        raise SingularActiveGram(str(exc)) from exc
    return np.eye(n) - rows.T @ inv @ rows


def rgp(
    x1, paths: ChannelPaths, params: SystemParams, theta: Optional[float] = None,
    eps2: float = 1e-3, max_iter: int = 500,
) -> RgpResult:
    """Rosen's gradient projection on p2 over the spacing polytope.

    Descends along the gradient projected onto the null space of the active
    constraint rows; at a projected stationary point, the row with the most
    negative multiplier estimate is released before declaring convergence.
    """
    theta = params.target_angle if theta is None else theta
    x = np.asarray(x1, dtype=float).copy()
    u, l_u = chain_constraints(params.n_tx, params.d_min, params.aperture_tx)

    def p2_or_inf(pt):
        try:
            return p2(pt, paths, params, theta)
        except Infeasible:
            return np.inf

    value = p2(x, paths, params, theta)
    x_trace = [x.copy()]
    p2_trace = [value]
    armijo_bounds: list = []
    status = "iteration_cap"
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        try:
            grad = grad_p2(x, paths, params, theta)
        except DegenerateArg:
            status = "degenerate_endpoint"
            break
        active = [k for k in range(u.shape[0]) if l_u[k] - u[k] @ x <= ACTIVE_ROW_TOL]
        if len(active) == u.shape[0]:
            active.pop()  # aperture row is implied when every row is tight
        # Release rows with negative multiplier estimates before testing
        # stationarity, per the constraint-drop step of the method.
        while True:
            rows = u[active]
            proj_grad = _projector(rows) @ grad
            if np.linalg.norm(proj_grad) >= eps2:
                break
            if not active:
                status = "stationary"
                converged = True
                break
            mult = -np.linalg.solve(rows @ rows.T, rows @ grad)
            j = int(np.argmin(mult))
            if mult[j] >= 0.0:
                status = "stationary"
                converged = True
                break
            active.pop(j)
        if converged or status == "degenerate_endpoint":
            break

        direction = -proj_grad
        # Largest feasible step along the projected direction.  Working rows
        # are orthogonal to it by construction and are skipped so numerical
        # dust cannot produce a zero-length cap.
        u_dir = u @ direction
        in_working = set(active)
        alpha_max = np.inf
        for k in range(u.shape[0]):
            if k in in_working or u_dir[k] <= 1e-14:
                continue
            alpha_max = min(alpha_max, max((l_u[k] - u[k] @ x) / u_dir[k], 0.0))
        alpha = min(1.0, alpha_max)
        decrement = float(proj_grad @ proj_grad)
        accepted = False
        for _ in range(ARMIJO_MAX_BACKTRACKS):
            if alpha <= 0.0:
                break
            candidate = x + alpha * direction
            if p2_or_inf(candidate) <= value - ARMIJO_SIGMA * alpha * decrement:
                accepted = True
                break
            alpha *= ARMIJO_BACKTRACK
        if not accepted:
            status = "line_search_stalled"
            break
        x = candidate
        armijo_bounds.append(value - ARMIJO_SIGMA * alpha * decrement)
        value = p2(x, paths, params, theta)
        x_trace.append(x.copy())
        p2_trace.append(value)
    return RgpResult(
        x=x, p2_value=value, iterations=it, converged=converged, status=status,
        x_trace=tuple(x_trace), p2_trace=tuple(p2_trace),
        armijo_bounds=tuple(armijo_bounds),
    )


@dataclass(frozen=True)
class TxSolution:
    """Joint transmit placement / beamformer output for one channel."""

    apv: np.ndarray
    beam: np.ndarray
    crb: CrbValue
    sp1_feasible: bool
    mm: MmResult
    rgp: Optional[RgpResult]


def solve_transmit_nlos(
    paths: ChannelPaths, params: SystemParams, theta: Optional[float] = None,
    x0=None, eps1: float = 1e-3, eps2: float = 1e-3,
    max_iter_mm: int = 500, max_iter_rgp: int = 500,
) -> TxSolution:
    """Two-stage transmit design: SNR-feasibility search, then angle descent.

    A feasible placement from the MM stage already attains the CRB floor with
    full-power sensing; otherwise the projected-gradient stage minimizes the
    angle sum starting from the MM iterate.  The receive array is the
    half-wavelength ULA of the transmit-only setting.
    """
    theta = params.target_angle if theta is None else theta
    if x0 is None:
        x0 = ulah_positions(params.n_tx, params.d_min)
    mm = mm_sp1(x0, paths, params, theta, eps1=eps1, max_iter=max_iter_mm)
    rgp_result = None
    x = mm.x
    sp1_feasible = mm.feasible
    if not mm.feasible:
        rgp_result = rgp(mm.x, paths, params, theta, eps2=eps2, max_iter=max_iter_rgp)
        x = rgp_result.x
        # The angle-descent stage ignores the feasibility boundary; if it
        # crossed it, the run is an SNR-feasible outcome after all.
        sp1_feasible = p1(x, paths, theta) > sp1_threshold(params)

    h = channel(x, paths)
    a = steering(x, theta)
    w = optimal_beamformer(h, a, params)
    y = ulah_positions(params.n_rx, params.d_min)
    crb = crb_simplified(x, y, w, params)
    return TxSolution(
        apv=x, beam=w, crb=crb, sp1_feasible=sp1_feasible, mm=mm, rgp=rgp_result
    )
