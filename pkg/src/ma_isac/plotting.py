"""Figure rendering for sweep and beampattern reports.

Figures are written next to the delimited output; the CSV stays the
canonical artifact and plotting never alters it.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

AXIS_LABELS = {
    "gamma": "required SNR threshold (dB)",
    "aperture": "array aperture (wavelengths)",
    "ntx": "transmit antennas",
    "nrx": "receive antennas",
}


def _scheme_series(rows: Sequence[dict], value_key: str, y_key: str):
    series: dict = {}
    for row in rows:
        if row.get("status", "ok") != "ok":
            continue
        series.setdefault(row["scheme"], {}).setdefault(row[value_key], []).append(row[y_key])
    return series


def save_sweep_figure(rows: Sequence[dict], path: str, axis: str) -> None:
    """Mean root-CRB per scheme against the sweep axis, log-scaled."""
    series = _scheme_series(rows, "value", "root_crb_deg")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for scheme in sorted(series):
        values = sorted(series[scheme])
        means = [np.mean(series[scheme][v]) for v in values]
        ax.semilogy(values, means, marker="o", label=scheme)
    ax.set_xlabel(AXIS_LABELS.get(axis, axis))
    ax.set_ylabel("root-CRB (degrees)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_beampattern_figure(rows: Sequence[dict], path: str) -> None:
    """Beampattern in dB over azimuth for every scheme."""
    series = _scheme_series(rows, "angle_deg", "power")
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for scheme in sorted(series):
        angles = np.array(sorted(series[scheme]))
        power = np.array([series[scheme][a][0] for a in angles])
        ax.plot(angles, 10.0 * np.log10(np.maximum(power, 1e-12)), label=scheme)
    ax.set_xlabel("azimuth (degrees)")
    ax.set_ylabel("beampattern (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
