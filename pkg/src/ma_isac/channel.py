"""Rician multipath channel draws and grid quantization of positions."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import RepairFailed
from .params import ChannelPaths

# Dominant-path power fraction kappa/(kappa+1); remaining paths share the rest.


def generate_channel(
    n_paths: int, kappa: float, seed: int, trial: int = 0,
    theta_t1: Optional[float] = None,
) -> ChannelPaths:
    """Draw one Rician channel realization on the (seed, trial) substream.

    The dominant path gain is CN(0, kappa/(kappa+1)); each of the remaining
    n_paths-1 gains is CN(0, 1/((kappa+1)(n_paths-1))).  Departure angles are
    i.i.d. uniform over (-pi/2, pi/2); passing `theta_t1` pins the dominant
    path's angle.  Streams are keyed on (seed, trial) so trials are
    reproducible in any order.
    """
    rng = np.random.default_rng((int(seed), int(trial)))
    gains = np.empty(n_paths, dtype=complex)
    scale1 = math.sqrt(kappa / (kappa + 1.0) / 2.0)
    gains[0] = complex(rng.normal(0, scale1), rng.normal(0, scale1))
    if n_paths > 1:
        scale = math.sqrt(1.0 / ((kappa + 1.0) * (n_paths - 1)) / 2.0)
        re = rng.normal(0, scale, n_paths - 1)
        im = rng.normal(0, scale, n_paths - 1)
        gains[1:] = re + 1j * im
    aods = rng.uniform(-np.pi / 2, np.pi / 2, n_paths)
    if theta_t1 is not None:
        aods[0] = theta_t1
    return ChannelPaths(gains=gains, aods=aods)


def quantize_apv(x, step: float, d_min: float, aperture: float) -> np.ndarray:
    """Snap positions to a grid while keeping spacing/aperture feasibility.

    Each position rounds to its nearest grid point (ties round up);
    violated gaps are then pushed apart minimally left to right, staying on
    the grid, and the aperture is restored by a right-to-left pull if the
    pushes overshot the rail.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    units = np.floor(x / step + 0.5).astype(int)
    gap_units = math.ceil(d_min / step - 1e-12)
    span_units = math.floor(aperture / step + 1e-12)
    if (x.size - 1) * gap_units > span_units:
        raise RepairFailed(
            f"no feasible grid layout: {x.size} antennas need "
            f"{(x.size - 1) * gap_units} units but only {span_units} fit"
        )
    for i in range(1, x.size):
        units[i] = max(units[i], units[i - 1] + gap_units)
    if units[-1] - units[0] > span_units:
        units[-1] = units[0] + span_units
        for i in range(x.size - 2, 0, -1):
            units[i] = min(units[i], units[i + 1] - gap_units)
    gaps = np.diff(units)
    if gaps.size and gaps.min() < gap_units:
        raise RepairFailed("grid repair could not restore the spacing constraint")
    return units.astype(float) * step
