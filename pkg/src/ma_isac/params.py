"""System constants and antenna-position containers.

All lengths are expressed in carrier wavelengths (lambda = 1 internally);
powers are linear (milliwatts when fed from dBm at the CLI boundary).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidGeometry

# Slack used whenever a geometric inequality is checked numerically.
GEOM_TOL = 1e-9


def db_to_linear(db: float) -> float:
    return float(10.0 ** (db / 10.0))


def linear_to_db(value: float) -> float:
    return float(10.0 * np.log10(value))


@dataclass(frozen=True)
class SystemParams:
    """Scalar physical and algorithmic constants of one scenario.

    Attributes
    ----------
    d_min : minimum inter-antenna spacing in wavelengths.
    aperture_tx, aperture_rx : rail lengths D_x, D_y in wavelengths.
    n_tx, n_rx : transmit / receive array sizes.
    power_budget : transmit power, linear.
    noise_comm, noise_radar : communication / radar noise powers, linear.
    snr_threshold : required user SNR, linear ratio.
    frame_len : radar pulse / communication frame length.
    reflect_coeff : complex target reflection coefficient.
    target_angle : target azimuth in radians, inside (-pi/2, pi/2).
    """

    n_tx: int = 8
    n_rx: int = 10
    d_min: float = 0.5
    aperture_tx: float = 13.55
    aperture_rx: float = 13.55
    power_budget: float = 100.0
    noise_comm: float = 1.0
    noise_radar: float = 1.0
    snr_threshold: float = 10.0
    frame_len: int = 30
    reflect_coeff: complex = 1.0 + 0.0j
    target_angle: float = 0.0

    def __post_init__(self):
        if self.n_tx < 2 or self.n_rx < 2:
            raise InvalidGeometry("need at least two antennas per array")
        if self.n_rx <= self.n_tx:
            raise InvalidGeometry(
                f"receive array must be larger than transmit array "
                f"(got n_rx={self.n_rx} <= n_tx={self.n_tx})"
            )
        if self.d_min <= 0:
            raise InvalidGeometry("d_min must be positive")
        if self.aperture_tx < (self.n_tx - 1) * self.d_min - GEOM_TOL:
            raise InvalidGeometry(
                f"aperture_tx={self.aperture_tx} cannot hold {self.n_tx} antennas "
                f"at spacing {self.d_min}"
            )
        if self.aperture_rx < (self.n_rx - 1) * self.d_min - GEOM_TOL:
            raise InvalidGeometry(
                f"aperture_rx={self.aperture_rx} cannot hold {self.n_rx} antennas "
                f"at spacing {self.d_min}"
            )
        for name in ("power_budget", "noise_comm", "noise_radar"):
            if getattr(self, name) <= 0:
                raise InvalidGeometry(f"{name} must be positive")
        if self.snr_threshold < 0:
            raise InvalidGeometry("snr_threshold must be non-negative")
        if self.frame_len <= self.n_tx:
            raise InvalidGeometry("frame_len must exceed n_tx")
        if not -np.pi / 2 < self.target_angle < np.pi / 2:
            raise InvalidGeometry("target_angle must lie inside (-pi/2, pi/2)")

    def with_(self, **overrides) -> "SystemParams":
        """Return a copy with the given fields replaced."""
        return replace(self, **overrides)


def validate_apv(positions, d_min: float, aperture: float, tol: float = GEOM_TOL) -> np.ndarray:
    """Check an antenna position vector against spacing and aperture limits.

    Returns the positions as a float array; raises InvalidGeometry otherwise.
    """
    x = np.asarray(positions, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise InvalidGeometry("positions must be a 1-D vector")
    gaps = np.diff(x)
    if x.size > 1 and gaps.min() < d_min - tol:
        raise InvalidGeometry(f"minimum gap {gaps.min():.6g} below d_min={d_min}")
    if np.any(gaps <= 0):
        raise InvalidGeometry("positions must be strictly increasing")
    if x[-1] - x[0] > aperture + tol:
        raise InvalidGeometry(f"span {x[-1] - x[0]:.6g} exceeds aperture {aperture}")
    return x


def is_feasible_apv(positions, d_min: float, aperture: float, tol: float = GEOM_TOL) -> bool:
    try:
        validate_apv(positions, d_min, aperture, tol)
    except InvalidGeometry:
        return False
    return True


@dataclass(frozen=True)
class ChannelPaths:
    """Multipath transmit channel: per-path complex gains and departure angles."""

    gains: np.ndarray
    aods: np.ndarray

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        aods = np.atleast_1d(np.asarray(self.aods, dtype=float))
        if gains.shape != aods.shape or gains.ndim != 1 or gains.size < 1:
            raise InvalidGeometry("gains and aods must be 1-D vectors of equal length")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "aods", aods)

    @property
    def n_paths(self) -> int:
        return self.gains.size

    @property
    def is_los(self) -> bool:
        return self.n_paths == 1


def check_beam_power(w, power_budget: float, tol: float = 1e-9) -> np.ndarray:
    """Validate the power budget of a beamforming vector and return it as complex."""
    w = np.asarray(w, dtype=complex)
    power = float(np.vdot(w, w).real)
    if power > power_budget * (1.0 + tol) + tol:
        raise InvalidGeometry(f"beam power {power:.6g} exceeds budget {power_budget}")
    return w
