"""Closed-form dual-function beamformer and its trigonometric reformulation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible
from .params import SystemParams, linear_to_db
from .signal_model import channel, steering

# Inverse-trig arguments may overshoot [0, 1] by this much before we error out.
CLAMP_TOL = 1e-9


def _clamp_unit(value: float, what: str) -> float:
    if value < -CLAMP_TOL or value > 1.0 + CLAMP_TOL:
        raise ValueError(f"{what}={value!r} outside [0, 1] beyond clamp tolerance")
    return min(max(value, 0.0), 1.0)


def _unit_phase(z: complex) -> complex:
    mag = abs(z)
    return z / mag if mag > 0.0 else 1.0 + 0.0j


def _check_snr_feasible(h_norm_sq: float, params: SystemParams) -> float:
    need = params.snr_threshold * params.noise_comm
    if h_norm_sq <= 0.0:
        raise Infeasible("channel vector is zero; no power reaches the user")
    if need > params.power_budget * h_norm_sq * (1.0 + CLAMP_TOL):
        raise Infeasible(
            f"SNR target needs {need:.6g} but full power toward the user "
            f"yields at most {params.power_budget * h_norm_sq:.6g}"
        )
    return need


def optimal_beamformer(h, a, params: SystemParams) -> np.ndarray:
    """Optimal dual-function beamformer for given channel and steering vectors.

    When the SNR constraint is slack at full-power sensing, all power steers
    toward the target; otherwise the beam splits between the user direction
    and its orthogonal complement so the SNR constraint holds with equality.
    Either way ||w||^2 = P_T.

    Raises Infeasible if even full power toward the user misses the SNR target.
    """
    h = np.asarray(h, dtype=complex)
    a = np.asarray(a, dtype=complex)
    h_norm_sq = float(np.vdot(h, h).real)
    need = _check_snr_feasible(h_norm_sq, params)
    p_t = params.power_budget
    n_t = a.size

    hha = np.vdot(h, a)  # h^H a
    if p_t * abs(hha) ** 2 > n_t * need:
        # Sensing-only optimum already satisfies the user's SNR.
        return np.sqrt(p_t) * a / np.linalg.norm(a)

    u1 = h / np.sqrt(h_norm_sq)
    proj = np.vdot(u1, a)
    a_perp = a - proj * u1
    perp_norm = np.linalg.norm(a_perp)
    if perp_norm < 1e-12 * np.linalg.norm(a):
        # h and a collinear: the orthogonal component is vacuous and the limit
        # of the two-term combination is full power along the user channel.
        return np.sqrt(p_t) * h / np.sqrt(h_norm_sq)
    a_u = a_perp / perp_norm

    c1 = np.sqrt(need / h_norm_sq) * _unit_phase(proj)
    c2 = np.sqrt(max(p_t - need / h_norm_sq, 0.0)) * _unit_phase(np.vdot(a_u, a))
    return c1 * u1 + c2 * a_u


@dataclass(frozen=True)
class TrigState:
    """Angles encoding channel/steering alignment and SNR slack.

    cos(upsilon) is the normalized directional response |h^H a|/(||h|| ||a||);
    sin(phi) is the fraction of full user-directed power the SNR target needs.
    """

    upsilon: float
    phi: float


def trig_state(h, a, params: SystemParams) -> TrigState:
    h = np.asarray(h, dtype=complex)
    a = np.asarray(a, dtype=complex)
    h_norm_sq = float(np.vdot(h, h).real)
    need = _check_snr_feasible(h_norm_sq, params)

    cos_ups = _clamp_unit(
        abs(np.vdot(h, a)) / (np.sqrt(h_norm_sq) * np.linalg.norm(a)),
        "cos(upsilon)",
    )
    sin_phi = _clamp_unit(
        np.sqrt(need / (params.power_budget * h_norm_sq)), "sin(phi)"
    )
    return TrigState(upsilon=float(np.arccos(cos_ups)), phi=float(np.arcsin(sin_phi)))


def ft_value(h, a, params: SystemParams) -> float:
    """Directional gain |a^H w| of the SNR-tight beam, sine form."""
    state = trig_state(h, a, params)
    n_t = np.asarray(a).size
    return float(np.sqrt(n_t * params.power_budget) * np.sin(state.upsilon + state.phi))


def ft_value_direct(h, a, params: SystemParams) -> float:
    """Same gain evaluated from the raw two-term expression (test cross-check)."""
    h = np.asarray(h, dtype=complex)
    a = np.asarray(a, dtype=complex)
    h_norm_sq = float(np.vdot(h, h).real)
    need = _check_snr_feasible(h_norm_sq, params)
    hha_abs = abs(np.vdot(h, a))
    a_norm_sq = float(np.vdot(a, a).real)
    residual = max(h_norm_sq * a_norm_sq - hha_abs**2, 0.0)
    return float(
        np.sqrt(need) / h_norm_sq * hha_abs
        + np.sqrt(max(params.power_budget - need / h_norm_sq, 0.0))
        * np.sqrt(residual / h_norm_sq)
    )


def gamma0(h, a, params: SystemParams) -> float:
    """SNR threshold up to which the CRB can stay at its global floor."""
    h = np.asarray(h, dtype=complex)
    a = np.asarray(a, dtype=complex)
    return float(
        params.power_budget * abs(np.vdot(h, a)) ** 2 / (a.size * params.noise_comm)
    )


@dataclass(frozen=True)
class SnrHeadroom:
    """Gamma_0 thresholds of an optimized placement and a ULA reference."""

    gamma0_opt: float
    gamma0_ula: float

    @property
    def delta_db(self) -> float:
        """SNR headroom gained by the movable array, 20 lg of the response ratio."""
        return linear_to_db(self.gamma0_opt / self.gamma0_ula)


def snr_headroom(paths, x_opt, params: SystemParams, x_ula=None) -> SnrHeadroom:
    """Compare Gamma_0 of optimized transmit positions against a ULA baseline."""
    from .receive_opt import ulah_positions

    if x_ula is None:
        x_ula = ulah_positions(params.n_tx, params.d_min)
    theta = params.target_angle

    def g0(x):
        return gamma0(channel(x, paths), steering(x, theta), params)

    return SnrHeadroom(gamma0_opt=g0(x_opt), gamma0_ula=g0(x_ula))
