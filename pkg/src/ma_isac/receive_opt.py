"""Receive-array spread metric, closed-form optimal placement and gain ratios."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidGeometry, OddNrUnsupported
from .params import GEOM_TOL, SystemParams, linear_to_db


def spread_metric(y) -> float:
    """Second central moment sum(y^2) - (sum y)^2 / n driving angular Fisher info."""
    y = np.asarray(y, dtype=float)
    return float(y @ y - y.sum() ** 2 / y.size)


def ulah_positions(n: int, d: float) -> np.ndarray:
    """Uniform linear array with spacing d, anchored at zero."""
    return d * np.arange(n, dtype=float)


def ulaf_positions(n: int, aperture: float) -> np.ndarray:
    """Uniform linear array stretched over the full aperture."""
    return aperture / (n - 1) * np.arange(n, dtype=float)


@dataclass(frozen=True)
class RxSolution:
    """Optimal receive placement: two d-spaced blocks pushed to the rail ends."""

    apv: np.ndarray
    spread: float
    tie_choice: str  # "left" or "right"; only meaningful for odd array sizes


def optimal_rx_positions(params: SystemParams, tie: str = "left") -> RxSolution:
    """Closed-form maximizer of the spread metric on the receive rail."""
    return end_blocked_positions(
        params.n_rx, params.d_min, params.aperture_rx, tie=tie
    )


def end_blocked_positions(n: int, d: float, dy: float, tie: str = "left") -> RxSolution:
    """Spread-maximizing placement for n antennas with spacing d on a rail dy.

    Half of the antennas pack at spacing d against each rail end; for an odd
    array the middle antenna joins the lower block ("left") or the upper block
    ("right"), both choices yielding the same spread.
    """
    if tie not in ("left", "right"):
        raise ValueError("tie must be 'left' or 'right'")
    if n < 2:
        raise InvalidGeometry("need at least two receive antennas")
    if dy < (n - 1) * d - GEOM_TOL:
        raise InvalidGeometry(f"aperture {dy} too small for {n} antennas at spacing {d}")

    half = n // 2
    lower = d * np.arange(half, dtype=float)
    upper = dy - d * np.arange(half - 1, -1, -1, dtype=float)
    if n % 2 == 0:
        y = np.concatenate([lower, upper])
    else:
        mid = half * d if tie == "left" else dy - half * d
        y = np.concatenate([lower, [mid], upper])
    return RxSolution(apv=y, spread=spread_metric(y), tie_choice=tie)


@dataclass(frozen=True)
class GainRatio:
    """Spread-metric ratios between the optimal placement and ULA baselines."""

    direct: float                 # f(y_opt) / f(y_ULAF), any array size
    closed_form: Optional[float]  # same ratio in closed form; even sizes only
    ulah_over_ulaf: float         # CRB_ULAH / CRB_ULAF = D^2 / ((n-1) d)^2
    upper_bound: float            # 3 (n-1) / (n+1), itself below 3 (4.77 dB)

    @property
    def direct_db(self) -> float:
        return linear_to_db(self.direct)

    @property
    def upper_bound_db(self) -> float:
        return linear_to_db(self.upper_bound)


def eq_gain_closed_form(n: int, d: float, aperture: float) -> float:
    """Closed-form f(y_opt)/f(y_ULAF) for an even receive array."""
    if n % 2 != 0:
        raise OddNrUnsupported("closed-form gain ratio requires an even array size")
    rho = (n - 1) * d / aperture
    return (n - 2) / (n + 1) * rho * (rho - 3.0) + 3.0 * (n - 1) / (n + 1)


def crb_gain_ratio(params: SystemParams, tie: str = "left") -> GainRatio:
    """CRB gain of receive MAs over the full-aperture ULA, with its 4.77 dB cap."""
    n, d, dy = params.n_rx, params.d_min, params.aperture_rx
    f_opt = optimal_rx_positions(params, tie=tie).spread
    f_ulaf = spread_metric(ulaf_positions(n, dy))
    f_ulah = spread_metric(ulah_positions(n, d))
    closed = eq_gain_closed_form(n, d, dy) if n % 2 == 0 else None
    return GainRatio(
        direct=f_opt / f_ulaf,
        closed_form=closed,
        ulah_over_ulaf=f_ulaf / f_ulah,
        upper_bound=3.0 * (n - 1) / (n + 1),
    )
