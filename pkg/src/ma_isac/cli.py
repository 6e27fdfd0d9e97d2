"""Command-line interface: one-shot evaluation, optimizers, sweeps, oracles.

Exit codes: 0 success, 2 configuration error, 3 infeasible scenario,
4 oracle certification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import oracle, transmit_nlos
from .beamforming import optimal_beamformer, snr_headroom
from .channel import generate_channel
from .errors import ConfigError, Infeasible, MaIsacError
from .harness import (
    AXES, BEAMPATTERN_COLUMNS, CASES, SCHEMES, SWEEP_COLUMNS, ScenarioConfig,
    evaluate_scheme, load_config, run_beampattern, run_sweep, sweep_means,
    write_csv,
)
from .params import linear_to_db
from .receive_opt import crb_gain_ratio, optimal_rx_positions, spread_metric
from .signal_model import channel, crb_simplified, steering
from .transmit_los import bt_bfs, bt_dfs

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_CERTIFICATION = 4

_OVERRIDE_FLAGS = {
    "--ntx": ("n_tx", int),
    "--nrx": ("n_rx", int),
    "--d-min": ("d_min", float),
    "--aperture-tx": ("aperture_tx", float),
    "--aperture-rx": ("aperture_rx", float),
    "--power-dbm": ("power_dbm", float),
    "--noise-comm-dbm": ("noise_comm_dbm", float),
    "--noise-radar-dbm": ("noise_radar_dbm", float),
    "--gamma-db": ("gamma_db", float),
    "--frame-len": ("frame_len", int),
    "--target-deg": ("target_angle_deg", float),
    "--n-paths": ("n_paths", int),
    "--kappa": ("kappa", float),
    "--theta-t1-deg": ("theta_t1_deg", float),
    "--seed": ("seed", int),
    "--trials": ("trials", int),
    "--quantize": ("quantize_step", float),
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON scenario file; flags override it")
    for flag, (dest, typ) in _OVERRIDE_FLAGS.items():
        parser.add_argument(flag, dest=dest, type=typ, default=None)
    parser.add_argument("--out", help="CSV output path")
    parser.add_argument("--case", choices=CASES, default=None)
    parser.add_argument(
        "--no-plot", action="store_true",
        help="skip the PNG figure normally written next to --out",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ma-isac",
        description="Movable-antenna ISAC placement and beamforming toolbox",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crb", help="one-shot CRB evaluation for one scheme")
    _add_common(p)
    p.add_argument("--scheme", choices=SCHEMES, default="rx-ma")

    p = sub.add_parser("optimize-rx", help="closed-form receive placement")
    _add_common(p)

    p = sub.add_parser("optimize-tx", help="transmit placement solver")
    _add_common(p)
    p.add_argument("--mode", choices=("bfs", "dfs", "mm-rgp"), required=True)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep over an axis")
    _add_common(p)
    p.add_argument("--axis", choices=AXES, default=None)
    p.add_argument("--values", help="comma-separated axis values")
    p.add_argument("--schemes", help="comma-separated scheme list")

    p = sub.add_parser("beampattern", help="beampattern table per scheme")
    _add_common(p)
    p.add_argument("--schemes", help="comma-separated scheme list")

    p = sub.add_parser("oracle", help="brute-force certification checks")
    _add_common(p)
    p.add_argument("--check", choices=("rx", "tx-los", "grad", "qp"), required=True)
    return parser


def _config_from_args(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    for dest, _ in _OVERRIDE_FLAGS.values():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[dest] = value
    for name in ("case",):
        if getattr(args, name, None):
            overrides[name] = getattr(args, name)
    if getattr(args, "axis", None):
        overrides["sweep_axis"] = args.axis
    if getattr(args, "values", None):
        overrides["sweep_values"] = tuple(float(v) for v in args.values.split(","))
    if getattr(args, "schemes", None):
        overrides["schemes"] = tuple(args.schemes.split(","))
    if getattr(args, "scheme", None):
        overrides["schemes"] = (args.scheme,)
    return cfg.with_(**overrides)


def _emit(rows, cfg, args, columns, figure_kind) -> None:
    if args.out:
        write_csv(rows, cfg, args.out, columns)
        print(f"wrote {len(rows)} rows to {args.out}")
        if not args.no_plot:
            from . import plotting

            fig_path = str(Path(args.out).with_suffix(".png"))
            if figure_kind == "sweep":
                plotting.save_sweep_figure(rows, fig_path, cfg.sweep_axis)
            else:
                plotting.save_beampattern_figure(rows, fig_path)
            print(f"wrote figure to {fig_path}")
    else:
        for row in rows[: min(len(rows), 40)]:
            print({k: row[k] for k in columns})
        if len(rows) > 40:
            print(f"... {len(rows) - 40} more rows (use --out to keep them all)")


def cmd_crb(args) -> int:
    cfg = _config_from_args(args)
    params = cfg.system_params()
    paths = generate_channel(cfg.effective_paths, cfg.kappa, cfg.seed, 0, cfg.theta_t1())
    row = evaluate_scheme(cfg.schemes[0], cfg, params, paths, 0)
    if row["status"] != "ok":
        print(f"status: {row['status']}")
        return EXIT_INFEASIBLE
    print(f"scheme:          {row['scheme']}")
    print(f"root-CRB:        {row['root_crb_rad']:.6e} rad  "
          f"({row['root_crb_deg']:.6e} deg)")
    print(f"achieved SNR:    {row['achieved_snr_db']:.3f} dB")
    print(f"case objective:  {row['objective']:.6f}")
    return EXIT_OK


def cmd_optimize_rx(args) -> int:
    cfg = _config_from_args(args)
    params = cfg.system_params()
    sol = optimal_rx_positions(params)
    gain = crb_gain_ratio(params)
    print(f"positions (wavelengths): {np.array2string(sol.apv, precision=4)}")
    print(f"spread metric:           {sol.spread:.6f}")
    print(f"gain over ULAF:          {gain.direct:.6f} ({gain.direct_db:.3f} dB)")
    print(f"upper bound:             {gain.upper_bound:.6f} "
          f"({gain.upper_bound_db:.3f} dB, cap 4.77 dB)")
    return EXIT_OK


def cmd_optimize_tx(args) -> int:
    cfg = _config_from_args(args)
    if args.mode in ("bfs", "dfs") and not cfg.case.endswith("los"):
        cfg = cfg.with_(case="tx-los")
    if args.mode == "mm-rgp" and cfg.case == "rx":
        cfg = cfg.with_(case="tx-nlos")
    params = cfg.system_params()
    paths = generate_channel(cfg.effective_paths, cfg.kappa, cfg.seed, 0, cfg.theta_t1())
    theta = params.target_angle
    if args.mode == "bfs":
        sol = bt_bfs(params, paths.aods[0], theta)
        x = sol.apv
        print(f"objective g(x):   {sol.objective:.6f} (layer {sol.layer}, "
              f"{sol.n_evaluated} active sets)")
    elif args.mode == "dfs":
        sol = bt_dfs(params, paths.aods[0], theta, order_seed=cfg.seed)
        x = sol.apv
        print(f"objective g(x):   {sol.objective:.6f} (layer {sol.layer}, seed {sol.seed})")
    else:
        result = transmit_nlos.solve_transmit_nlos(
            paths, params, theta, eps1=cfg.eps1, eps2=cfg.eps2,
            max_iter_mm=cfg.max_iter, max_iter_rgp=cfg.max_iter,
        )
        x = result.apv
        print(f"directional response p1: {transmit_nlos.p1(x, paths, theta):.6f} "
              f"(SNR-feasible: {result.sp1_feasible})")
    print(f"positions (wavelengths): {np.array2string(x, precision=4)}")
    headroom = snr_headroom(paths, x, params)
    print(f"Gamma_0:          {linear_to_db(headroom.gamma0_opt):.3f} dB "
          f"(ULA {linear_to_db(headroom.gamma0_ula):.3f} dB, "
          f"gain {headroom.delta_db:.3f} dB)")
    h = channel(x, paths)
    w = optimal_beamformer(h, steering(x, theta), params)
    y = optimal_rx_positions(params).apv if cfg.case.startswith("general") else None
    if y is None:
        from .receive_opt import ulah_positions

        y = ulah_positions(params.n_rx, params.d_min)
    crb = crb_simplified(x, y, w, params)
    print(f"root-CRB:         {crb.root_crb:.6e} rad ({crb.root_crb_deg:.6e} deg)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    rows = run_sweep(cfg)
    _emit(rows, cfg, args, SWEEP_COLUMNS, "sweep")
    means = sweep_means(rows)
    for (value, scheme) in sorted(means):
        print(f"  {cfg.sweep_axis}={value:g} {scheme}: "
              f"mean root-CRB {np.degrees(means[(value, scheme)]):.6e} deg")
    return EXIT_OK


def cmd_beampattern(args) -> int:
    cfg = _config_from_args(args)
    rows = run_beampattern(cfg)
    _emit(rows, cfg, args, BEAMPATTERN_COLUMNS, "beampattern")
    return EXIT_OK


def _certify_rx(cfg: ScenarioConfig) -> bool:
    ok = True
    for n_rx in (3, 4, 5, 6):
        params = cfg.system_params(
            n_rx=n_rx, n_tx=2, aperture_rx=2.0 if n_rx <= 5 else 3.0
        )
        sol = optimal_rx_positions(params)
        grid = oracle.GridSpec(step=1.0 / 20.0)
        _, best = oracle.grid_search_rx(params, grid)
        slack = oracle.grid_slack(2.0 * params.aperture_rx, grid.step, n_rx)
        line_ok = best <= sol.spread + slack
        ok &= line_ok
        print(f"rx n={n_rx}: grid {best:.6f} vs closed form {sol.spread:.6f} "
              f"(+slack {slack:.4f}) -> {'PASS' if line_ok else 'FAIL'}")
    return ok


def _certify_tx_los(cfg: ScenarioConfig) -> bool:
    ok = True
    rng = np.random.default_rng(cfg.seed)
    for trial in range(5):
        n_tx = int(rng.integers(2, 4))
        theta_t1 = float(rng.uniform(0.3, 1.4))
        theta = float(rng.uniform(-0.5, 0.5))
        s = abs(np.sin(theta_t1) + np.sin(theta))
        if s < 0.3:
            continue
        hi = min((n_tx - 1) / s * 0.95, 3.0)
        lo = (n_tx - 1) * 0.5
        if hi <= lo:
            continue
        aperture = float(rng.uniform(lo, hi))
        params = cfg.system_params(
            n_tx=n_tx, n_rx=n_tx + 1, aperture_tx=aperture, aperture_rx=aperture
        )
        sol = bt_bfs(params, theta_t1, theta)
        grid = oracle.GridSpec(step=1.0 / 50.0)
        _, best = oracle.grid_search_tx_los(params, theta_t1, theta, grid)
        slack = oracle.grid_slack(2 * np.pi * s * np.sqrt(n_tx), grid.step, n_tx)
        line_ok = sol.objective >= best - slack
        ok &= line_ok
        print(f"tx-los trial {trial}: bfs {sol.objective:.6f} vs grid {best:.6f} "
              f"(-slack {slack:.4f}) -> {'PASS' if line_ok else 'FAIL'}")
    return ok


def _certify_grad(cfg: ScenarioConfig) -> bool:
    ok = True
    params = cfg.system_params()
    rng = np.random.default_rng(cfg.seed)
    for trial in range(5):
        paths = generate_channel(4, cfg.kappa, cfg.seed, trial)
        x = np.cumsum(rng.uniform(params.d_min, 1.0, params.n_tx))
        surr = transmit_nlos.surrogate(x, paths, params.target_angle)
        fd = oracle.fd_gradient(lambda p: surr.value(p), x)
        err = np.linalg.norm(surr.grad - fd) / max(np.linalg.norm(fd), 1e-12)
        line_ok = err < 1e-5
        ok &= line_ok
        print(f"grad trial {trial}: surrogate FD error {err:.2e} "
              f"-> {'PASS' if line_ok else 'FAIL'}")
    return ok


def _certify_qp(cfg: ScenarioConfig) -> bool:
    ok = True
    rng = np.random.default_rng(cfg.seed)
    params = cfg.system_params()
    for trial in range(5):
        delta = float(rng.uniform(0.5, 3.0))
        linear = rng.normal(0, 3.0, params.n_tx)
        ref = oracle.qp_reference(delta, linear, params.d_min, params.aperture_tx)
        from .projection import project_chain

        main = project_chain(linear / delta, params.d_min, params.aperture_tx)

        def objective(x):
            return -delta / 2 * float(x @ x) + float(linear @ x)

        gap = abs(objective(main) - objective(ref)) / max(abs(objective(ref)), 1.0)
        line_ok = gap < 1e-7
        ok &= line_ok
        print(f"qp trial {trial}: objective gap {gap:.2e} "
              f"-> {'PASS' if line_ok else 'FAIL'}")
    return ok


def cmd_oracle(args) -> int:
    cfg = _config_from_args(args)
    checks = {
        "rx": _certify_rx,
        "tx-los": _certify_tx_los,
        "grad": _certify_grad,
        "qp": _certify_qp,
    }
    passed = checks[args.check](cfg)
    print(f"oracle check {args.check}: {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_CERTIFICATION


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "crb": cmd_crb,
        "optimize-rx": cmd_optimize_rx,
        "optimize-tx": cmd_optimize_tx,
        "sweep": cmd_sweep,
        "beampattern": cmd_beampattern,
        "oracle": cmd_oracle,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Infeasible as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
