"""Steering vectors, field-response channel model, SNR, CRB and beampatterns.

Positions are in wavelengths, so every phase term is 2*pi*position*sin(angle).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry
from .params import ChannelPaths, SystemParams

TWO_PI = 2.0 * np.pi

# Fisher denominator below this multiple of the numerator scale means the
# angle is numerically unidentifiable.
DEGENERACY_FLOOR = 1e-18


@dataclass(frozen=True)
class CrbValue:
    """Angle-estimation variance bound (radians^2) and its square root."""

    crb: float
    root_crb: float

    @property
    def root_crb_deg(self) -> float:
        return float(np.degrees(self.root_crb))


def steering(positions, angle: float) -> np.ndarray:
    """Unit-modulus steering vector of a linear array toward `angle`."""
    x = np.asarray(positions, dtype=float)
    return np.exp(-1j * TWO_PI * x * np.sin(angle))


def steering_derivative(positions, angle: float) -> np.ndarray:
    """Derivative of the steering vector with respect to the angle."""
    x = np.asarray(positions, dtype=float)
    return -1j * TWO_PI * x * np.cos(angle) * steering(x, angle)


def field_response(positions, paths: ChannelPaths) -> np.ndarray:
    """Field response matrix G, one row per path and one column per antenna."""
    x = np.asarray(positions, dtype=float)
    return np.exp(-1j * TWO_PI * np.outer(np.sin(paths.aods), x))


def channel(positions, paths: ChannelPaths) -> np.ndarray:
    """User channel vector h with h^H = sigma^H G(x)."""
    g = field_response(positions, paths)
    return g.conj().T @ paths.gains


def user_snr(h, w, noise_comm: float) -> float:
    """Receive SNR |h^H w|^2 / sigma_C^2 at the downlink user."""
    return float(abs(np.vdot(h, w)) ** 2 / noise_comm)


def _crb_from_fisher(numerator: float, fisher: float) -> CrbValue:
    if fisher <= DEGENERACY_FLOOR * max(numerator, 1.0):
        raise DegenerateGeometry(
            f"Fisher information {fisher:.3e} below degeneracy floor"
        )
    crb = numerator / fisher
    return CrbValue(crb=float(crb), root_crb=float(np.sqrt(crb)))


def crb_general(x, y, w, params: SystemParams) -> CrbValue:
    """CRB of the target angle from the full trace form.

    The three traces involving the target response matrix and its angle
    derivative are evaluated through their closed-form contractions, never
    through explicit n_rx x n_tx products.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=complex)
    theta = params.target_angle
    n_r = y.size

    a = steering(x, theta)
    a_dot = steering_derivative(x, theta)
    k = TWO_PI * np.cos(theta)
    s1 = y.sum()
    s2 = float(y @ y)

    beta = np.vdot(a, w)        # a^H w
    gamma = np.vdot(a_dot, w)   # adot^H w

    tr_aa = n_r * abs(beta) ** 2
    tr_da_a = 1j * k * s1 * abs(beta) ** 2 + n_r * beta * np.conj(gamma)
    tr_da_da = (
        k**2 * s2 * abs(beta) ** 2
        + (1j * k * s1 * (gamma * np.conj(beta) - beta * np.conj(gamma))).real
        + n_r * abs(gamma) ** 2
    )

    numerator = params.noise_radar * tr_aa
    scale = 2.0 * abs(params.reflect_coeff) ** 2 * params.frame_len
    fisher = scale * (tr_da_da * tr_aa - abs(tr_da_a) ** 2)
    return _crb_from_fisher(float(numerator), float(fisher))


def crb_simplified(x, y, w, params: SystemParams) -> CrbValue:
    """Simplified CRB: noise / (2|alpha|^2 L k^2 |a^H w|^2 f(y))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=complex)
    theta = params.target_angle

    a = steering(x, theta)
    gain = abs(np.vdot(a, w)) ** 2
    spread = float(y @ y) - y.sum() ** 2 / y.size
    k = TWO_PI * np.cos(theta)

    numerator = params.noise_radar / (2.0 * abs(params.reflect_coeff) ** 2 * params.frame_len)
    fisher = k**2 * gain * spread
    return _crb_from_fisher(float(numerator), float(fisher))


def crb_floor(y, params: SystemParams) -> CrbValue:
    """Global CRB minimum over beamformers, reached at w = sqrt(P) a / ||a||."""
    y = np.asarray(y, dtype=float)
    theta = params.target_angle
    spread = float(y @ y) - y.sum() ** 2 / y.size
    k = TWO_PI * np.cos(theta)
    numerator = params.noise_radar / (
        2.0 * abs(params.reflect_coeff) ** 2 * params.frame_len
        * params.n_tx * params.power_budget
    )
    fisher = k**2 * spread
    return _crb_from_fisher(float(numerator), float(fisher))


def beampattern(positions, w, grid) -> np.ndarray:
    """Radiated power |a(phi)^H w|^2 over a grid of azimuth angles."""
    x = np.asarray(positions, dtype=float)
    w = np.asarray(w, dtype=complex)
    phi = np.atleast_1d(np.asarray(grid, dtype=float))
    phases = np.exp(1j * TWO_PI * np.outer(np.sin(phi), x))
    return np.abs(phases @ w) ** 2
