"""Scenario configuration, Monte-Carlo sweeps and delimited output.

A scenario fixes one experiment "case" (which side of the array is movable
and whether the channel is single-path) plus a list of placement schemes.
Sweeps iterate an axis (SNR target, aperture, array size), draw one channel
per trial from a (seed, trial)-keyed substream, run every scheme, and record
root-CRB, achieved SNR and the case objective per row.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import transmit_nlos
from .beamforming import optimal_beamformer
from .channel import generate_channel, quantize_apv
from .errors import ConfigError, MaIsacError
from .params import ChannelPaths, SystemParams, db_to_linear, linear_to_db
from .receive_opt import optimal_rx_positions, ulaf_positions, ulah_positions
from .signal_model import beampattern, channel, crb_simplified, steering, user_snr
from .transmit_los import bt_bfs, bt_dfs, g_objective

CASES = ("rx", "tx-los", "tx-nlos", "general-los", "general-nlos")
SCHEMES = ("rx-ma", "bt-bfs", "bt-dfs", "mm-rgp", "random-rgp", "ulah", "ulaf")
AXES = ("gamma", "aperture", "ntx", "nrx")

SWEEP_COLUMNS = (
    "axis", "value", "trial", "scheme", "root_crb_rad", "root_crb_deg",
    "achieved_snr_db", "objective", "status", "seed",
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Full experiment description; dB/degree units at this boundary only."""

    case: str = "rx"
    schemes: Tuple[str, ...] = ("rx-ma", "ulaf", "ulah")
    n_tx: int = 8
    n_rx: int = 10
    d_min: float = 0.5
    aperture_tx: float = 13.55
    aperture_rx: float = 13.55
    power_dbm: float = 20.0
    noise_comm_dbm: float = 0.0
    noise_radar_dbm: float = 0.0
    gamma_db: float = 10.0
    frame_len: int = 30
    target_angle_deg: float = 0.0
    n_paths: int = 4
    kappa: float = 3.0
    theta_t1_deg: Optional[float] = None
    seed: int = 0
    trials: int = 100
    sweep_axis: str = "gamma"
    sweep_values: Tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    quantize_step: Optional[float] = None
    eps1: float = 1e-3
    eps2: float = 1e-3
    max_iter: int = 500
    angle_grid_deg: Tuple[float, float, float] = (-90.0, 90.0, 0.25)

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}; expected one of {CASES}")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigError(f"unknown scheme {s!r}; expected one of {SCHEMES}")
            if s in ("bt-bfs", "bt-dfs") and self.case.endswith("nlos"):
                raise ConfigError(f"scheme {s!r} needs a single-path case")
        if self.sweep_axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.sweep_axis!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.quantize_step is not None and self.quantize_step <= 0:
            raise ConfigError("quantize_step must be positive")

    @property
    def is_los(self) -> bool:
        return self.case.endswith("los") and not self.case.endswith("nlos")

    @property
    def effective_paths(self) -> int:
        return 1 if self.is_los else self.n_paths

    def system_params(self, **overrides) -> SystemParams:
        values = dict(
            n_tx=self.n_tx,
            n_rx=self.n_rx,
            d_min=self.d_min,
            aperture_tx=self.aperture_tx,
            aperture_rx=self.aperture_rx,
            power_budget=db_to_linear(self.power_dbm),
            noise_comm=db_to_linear(self.noise_comm_dbm),
            noise_radar=db_to_linear(self.noise_radar_dbm),
            snr_threshold=db_to_linear(self.gamma_db),
            frame_len=self.frame_len,
            target_angle=float(np.radians(self.target_angle_deg)),
        )
        values.update(overrides)
        try:
            return SystemParams(**values)
        except MaIsacError as exc:
            raise ConfigError(str(exc)) from exc

    def theta_t1(self) -> Optional[float]:
        return None if self.theta_t1_deg is None else float(np.radians(self.theta_t1_deg))

    def with_(self, **overrides) -> "ScenarioConfig":
        return replace(self, **overrides)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        for key in ("schemes", "sweep_values", "angle_grid_deg"):
            if key in data and isinstance(data[key], list):
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return ScenarioConfig.from_dict(data)


def _params_for_axis(cfg: ScenarioConfig, value: float) -> SystemParams:
    axis = cfg.sweep_axis
    if axis == "gamma":
        return cfg.system_params(snr_threshold=db_to_linear(value))
    if axis == "aperture":
        over = {}
        if cfg.case != "rx":
            over["aperture_tx"] = float(value)
        if cfg.case == "rx" or cfg.case.startswith("general"):
            over["aperture_rx"] = float(value)
        return cfg.system_params(**over)
    if axis == "ntx":
        n = int(value)
        if cfg.frame_len <= n:
            raise ConfigError(f"frame_len={cfg.frame_len} must exceed swept n_tx={n}")
        return cfg.system_params(n_tx=n)
    if axis == "nrx":
        return cfg.system_params(n_rx=int(value))
    raise ConfigError(f"unknown axis {axis}")


def _random_feasible_apv(n: int, d: float, aperture: float, rng) -> np.ndarray:
    """Uniformly random feasible placement via rejection-sampled gaps."""
    for _ in range(10_000):
        gaps = rng.uniform(d, aperture, n - 1)
        if gaps.sum() <= aperture:
            x = np.concatenate([[0.0], np.cumsum(gaps)])
            return x + rng.uniform(0.0, aperture - x[-1])
    # Pathological aperture: fall back to the minimum-spacing layout.
    return d * np.arange(n, dtype=float)


def scheme_geometry(
    scheme: str, cfg: ScenarioConfig, params: SystemParams, paths: ChannelPaths,
    trial: int,
) -> Tuple[np.ndarray, np.ndarray, dict]:
    """Resolve (transmit, receive) positions for one scheme in one trial.

    The non-movable side of the current case is pinned to the half-wavelength
    ULA; ULA baselines replace the movable side only.
    """
    theta = params.target_angle
    case = cfg.case
    meta: dict = {}

    def tx_for(kind: str) -> np.ndarray:
        if kind == "ulah":
            return ulah_positions(params.n_tx, params.d_min)
        if kind == "ulaf":
            return ulaf_positions(params.n_tx, params.aperture_tx)
        if kind == "bt-bfs":
            sol = bt_bfs(params, paths.aods[0], theta)
            meta["tx_layer"] = sol.layer
            meta["tx_evaluated"] = sol.n_evaluated
            return sol.apv
        if kind == "bt-dfs":
            sol = bt_dfs(params, paths.aods[0], theta, order_seed=cfg.seed + trial)
            meta["tx_layer"] = sol.layer
            return sol.apv
        if kind == "mm-rgp":
            sol = transmit_nlos.solve_transmit_nlos(
                paths, params, theta, eps1=cfg.eps1, eps2=cfg.eps2,
                max_iter_mm=cfg.max_iter, max_iter_rgp=cfg.max_iter,
            )
            meta["sp1_feasible"] = sol.sp1_feasible
            return sol.apv
        if kind == "random-rgp":
            rng = np.random.default_rng((cfg.seed, trial, 0xA5))
            x0 = _random_feasible_apv(params.n_tx, params.d_min, params.aperture_tx, rng)
            if transmit_nlos.p1(x0, paths, theta) > transmit_nlos.sp1_threshold(params):
                return x0
            res = transmit_nlos.rgp(
                x0, paths, params, theta, eps2=cfg.eps2, max_iter=cfg.max_iter
            )
            return res.x
        raise ConfigError(f"scheme {kind!r} has no transmit strategy")

    def rx_for(kind: str) -> np.ndarray:
        if kind == "ulah":
            return ulah_positions(params.n_rx, params.d_min)
        if kind == "ulaf":
            return ulaf_positions(params.n_rx, params.aperture_rx)
        return optimal_rx_positions(params).apv

    pin_ula_rx = ulah_positions(params.n_rx, params.d_min)
    pin_ula_tx = ulah_positions(params.n_tx, params.d_min)

    if case == "rx":
        if scheme not in ("rx-ma", "ulah", "ulaf"):
            raise ConfigError(f"scheme {scheme!r} does not apply to the rx case")
        x = pin_ula_tx
        y = rx_for("opt" if scheme == "rx-ma" else scheme)
    elif case.startswith("tx"):
        if scheme == "rx-ma":
            raise ConfigError("scheme 'rx-ma' does not apply to transmit-only cases")
        x = tx_for(scheme)
        y = pin_ula_rx
    else:  # general: movable receive side for solver schemes
        x = tx_for("ulah" if scheme == "rx-ma" else scheme)
        y = rx_for(scheme if scheme in ("ulah", "ulaf") else "opt")

    if cfg.quantize_step is not None and scheme not in ("ulah", "ulaf"):
        x = quantize_apv(x, cfg.quantize_step, params.d_min, params.aperture_tx)
        y = quantize_apv(y, cfg.quantize_step, params.d_min, params.aperture_rx)
        meta["quantized"] = True
    return x, y, meta


def _case_objective(cfg, params, paths, x, y) -> float:
    if cfg.case == "rx":
        from .receive_opt import spread_metric

        return spread_metric(y)
    if cfg.is_los:
        return g_objective(x, paths.aods[0], params.target_angle)
    return transmit_nlos.p1(x, paths, params.target_angle)


def evaluate_scheme(
    scheme: str, cfg: ScenarioConfig, params: SystemParams, paths: ChannelPaths,
    trial: int,
) -> dict:
    """One row of a sweep: run the scheme and score it on this channel."""
    try:
        x, y, meta = scheme_geometry(scheme, cfg, params, paths, trial)
        h = channel(x, paths)
        a = steering(x, params.target_angle)
        w = optimal_beamformer(h, a, params)
        crb = crb_simplified(x, y, w, params)
        snr = user_snr(h, w, params.noise_comm)
        return {
            "scheme": scheme,
            "root_crb_rad": crb.root_crb,
            "root_crb_deg": crb.root_crb_deg,
            "achieved_snr_db": linear_to_db(snr) if snr > 0 else float("-inf"),
            "objective": _case_objective(cfg, params, paths, x, y),
            "status": "ok",
            "x": x,
            "y": y,
            "w": w,
        }
    except MaIsacError as exc:
        return {
            "scheme": scheme,
            "root_crb_rad": float("nan"),
            "root_crb_deg": float("nan"),
            "achieved_snr_db": float("nan"),
            "objective": float("nan"),
            "status": type(exc).__name__,
            "x": None,
            "y": None,
            "w": None,
        }


def run_sweep(cfg: ScenarioConfig) -> List[dict]:
    """Full sweep table, one row per (axis value, trial, scheme)."""
    rows: List[dict] = []
    for value in cfg.sweep_values:
        params = _params_for_axis(cfg, value)
        for trial in range(cfg.trials):
            paths = generate_channel(
                cfg.effective_paths, cfg.kappa, cfg.seed, trial, cfg.theta_t1()
            )
            for scheme in cfg.schemes:
                result = evaluate_scheme(scheme, cfg, params, paths, trial)
                rows.append({
                    "axis": cfg.sweep_axis,
                    "value": value,
                    "trial": trial,
                    "scheme": result["scheme"],
                    "root_crb_rad": result["root_crb_rad"],
                    "root_crb_deg": result["root_crb_deg"],
                    "achieved_snr_db": result["achieved_snr_db"],
                    "objective": result["objective"],
                    "status": result["status"],
                    "seed": cfg.seed,
                })
    return rows


def sweep_means(rows: Sequence[dict]) -> Dict[Tuple[float, str], float]:
    """Mean root-CRB (radians) over ok trials, keyed by (axis value, scheme)."""
    acc: Dict[Tuple[float, str], List[float]] = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        acc.setdefault((row["value"], row["scheme"]), []).append(row["root_crb_rad"])
    return {key: float(np.mean(vals)) for key, vals in acc.items()}


def run_beampattern(cfg: ScenarioConfig) -> List[dict]:
    """Beampattern table over the configured angle grid, one trial."""
    params = cfg.system_params()
    paths = generate_channel(cfg.effective_paths, cfg.kappa, cfg.seed, 0, cfg.theta_t1())
    start, stop, step = cfg.angle_grid_deg
    grid_deg = np.arange(start, stop + step / 2, step)
    grid = np.radians(grid_deg)
    rows: List[dict] = []
    for scheme in cfg.schemes:
        result = evaluate_scheme(scheme, cfg, params, paths, 0)
        if result["status"] != "ok":
            rows.append({
                "angle_deg": float("nan"), "scheme": scheme,
                "power": float("nan"), "status": result["status"],
            })
            continue
        power = beampattern(result["x"], result["w"], grid)
        for deg, p in zip(grid_deg, power):
            rows.append({
                "angle_deg": float(deg), "scheme": scheme,
                "power": float(p), "status": "ok",
            })
    return rows


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def render_csv(rows: Sequence[dict], cfg: ScenarioConfig, columns: Sequence[str]) -> str:
    buf = io.StringIO()
    buf.write(f"# config: {cfg.to_json()}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_value(row[col]) for col in columns])
    return buf.getvalue()


def write_csv(rows: Sequence[dict], cfg: ScenarioConfig, path: str,
              columns: Sequence[str] = SWEEP_COLUMNS) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_csv(rows, cfg, columns))


BEAMPATTERN_COLUMNS = ("angle_deg", "scheme", "power", "status")
