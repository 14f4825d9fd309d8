"""Command-line interface: ``swiptsec <command> [options]``.

Exit codes: 0 success, 1 infeasible instance, 2 numerical failure (or a
failed self-test / cross-check), 3 bad configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .conic import INFEASIBLE, OPTIMAL
from .harness import ExperimentConfig, SweepRow, load_config, run_sweep, solve_instance
from .model import SystemParams, dbm_to_watts, generate_channels, watts_to_dbm
from .outer import GridConfig

EXIT_OK, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2, 3

POWER_SWEEP = (20.0, 25.0, 30.0, 35.0, 40.0)
ENERGY_SWEEP = (-4.0, 0.0, 2.0, 4.0, 6.0, 8.0)
ORACLE_TOL = 0.05


class ConfigError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment configuration")
    common.add_argument("--seed", type=int, help="channel seed (first draw for sweeps)")
    common.add_argument("--out", type=Path, help="output file (JSON for solve, CSV for sweeps)")
    common.add_argument("--n-rand", type=int, help="Gaussian randomization candidates")
    common.add_argument("--grid-coarse", type=int, help="coarse grid points of the outer search")
    common.add_argument("--grid-refine", type=int, help="refinement points of the outer search")
    common.add_argument("--eq22-noise", choices=("on", "off"),
                        help="include eavesdropper receiver noise in the secrecy-rate evaluation")
    common.add_argument("--draws", type=int, help="channel draws per sweep value / oracle instances")
    common.add_argument("--workers", type=int, default=1, help="processes for sweeps (default 1)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")

    parser = argparse.ArgumentParser(prog="swiptsec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve one channel realization")
    sub.add_parser("sweep-power", parents=[common], help="mean secrecy rate versus transmit power")
    sub.add_parser("sweep-energy", parents=[common], help="mean secrecy rate versus harvesting threshold")
    sub.add_parser("oracle-check", parents=[common], help="pipeline versus brute force on tiny instances")
    sub.add_parser("selftest", parents=[common], help="run the quick invariant checks")
    return parser


def _config(args, variable: str | None = None, values=None, params: SystemParams | None = None
            ) -> ExperimentConfig:
    """Configuration from ``--config`` (or defaults) with flags applied."""
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        kw: dict = {}
        if args.config is None:
            if params is not None:
                kw["params"] = params
            if variable is not None:
                kw.update(sweep_variable=variable, sweep_values=values)
        elif variable is not None and cfg.sweep_variable != variable:
            raise ConfigError(f"config sweeps {cfg.sweep_variable!r}, command needs {variable!r}")
        if args.seed is not None:
            kw["seed"] = args.seed
        if args.n_rand is not None:
            kw["n_rand"] = args.n_rand
        if args.grid_coarse is not None or args.grid_refine is not None:
            kw["grid"] = GridConfig(args.grid_coarse or cfg.grid.n_coarse, args.grid_refine or cfg.grid.n_refine)
        if args.eq22_noise is not None:
            kw["eq22_noise"] = args.eq22_noise == "on"
        if args.draws is not None:
            kw["n_channel_draws"] = args.draws
        if args.out is not None:
            kw["output_path"] = str(args.out)
        return dataclasses.replace(cfg, **kw) if kw else cfg
    except ConfigError:
        raise
    except (OSError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def _fmt_vec(x) -> str:
    return "[" + ", ".join(f"{v:.4g}" for v in np.atleast_1d(x)) + "]"


def cmd_solve(args) -> int:
    cfg = _config(args)
    params = cfg.params
    channels = generate_channels(params, cfg.seed)
    res = solve_instance(params, channels, cfg.grid, cfg.n_rand, cfg.seed, eq22_noise=cfg.eq22_noise)
    print(f"instance: seed {cfg.seed}, P = {watts_to_dbm(params.p_total):.2f} dBm, "
          f"E_s = {watts_to_dbm(params.e_bar_s):.2f} dBm, E_e = {watts_to_dbm(params.e_bar_e):.2f} dBm")
    print(f"status: {res.status}")
    if res.solved:
        rep, rec = res.report, res.recovery
        print(f"t*: {res.t_star:.6g}")
        print(f"rate upper bound: {res.rate_upper:.6f} bits")
        print(f"rate SDR:         {res.rate_sdr:.6f} bits")
        print(f"rate SDR+GR:      {res.rate_sdr_gr:.6f} bits")
        print("design report:")
        print(f"  user rates:       {_fmt_vec(rep.user_rates)}")
        print(f"  eve rates (upper):{_fmt_vec(rep.eve_rates_upper)}")
        print(f"  user energy (W):  {_fmt_vec(rep.user_energies)}")
        print(f"  eve energy (W):   {_fmt_vec(rep.eve_energies)}")
        print(f"  total power (W):  {res.design.total_power:.6g}")
        print("recovery report:")
        for key, val in rec.as_dict().items():
            print(f"  {key}: {val}")
    if args.out is not None:
        out = {"config": cfg.as_dict(), "result": res.summary()}
        args.out.write_text(json.dumps(out, indent=2, sort_keys=True, default=_json_default) + "\n")
    if res.status == OPTIMAL:
        return EXIT_OK
    return EXIT_INFEASIBLE if res.status == INFEASIBLE else EXIT_NUMERICAL


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _print_rows(rows: list[SweepRow], variable: str) -> None:
    print(f"{variable + ' (dBm)':>14} {'upper':>10} {'SDR':>10} {'SDR+GR':>10} {'solved':>8}")
    for r in rows:
        print(f"{r.sweep_value:14.2f} {r.mean_rate_upper:10.4f} {r.mean_rate_sdr:10.4f} "
              f"{r.mean_rate_sdr_gr:10.4f} {r.n_feasible:>4d}/{r.n_total:<3d}")


def _cmd_sweep(args, variable: str, values, params: SystemParams | None = None) -> int:
    cfg = _config(args, variable, values, params)
    t0 = time.perf_counter()
    result = run_sweep(cfg, workers=max(1, args.workers))
    _print_rows(result.rows, variable)
    logging.getLogger(__name__).info("sweep finished in %.1f s", time.perf_counter() - t0)
    if cfg.output_path:
        print(f"wrote {cfg.output_path}")
    if any(f == r.n_total for f, r in zip(result.n_failed, result.rows)):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sweep_power(args) -> int:
    return _cmd_sweep(args, "power", POWER_SWEEP)


def cmd_sweep_energy(args) -> int:
    return _cmd_sweep(args, "energy", ENERGY_SWEEP, SystemParams(p_total=dbm_to_watts(30.0)))


def tiny_params() -> SystemParams:
    """Default oracle cross-check instance."""
    return SystemParams(n_tx=2, n_users=1, n_eves=1, n_eve_rx=1, p_total=dbm_to_watts(10.0),
                        e_bar_s=dbm_to_watts(-10.0), e_bar_e=dbm_to_watts(-10.0))


def cmd_oracle_check(args) -> int:
    from .oracle import brute_force_oracle

    cfg = _config(args, params=tiny_params())
    n = args.draws if args.draws is not None else (cfg.n_channel_draws if args.config else 10)
    params = cfg.params
    if (params.n_tx, params.n_users, params.n_eves, params.n_eve_rx) != (2, 1, 1, 1):
        raise ConfigError("oracle-check needs N_T=2, K=1, L=1, N_E=1")
    ok = True
    print(f"{'seed':>6} {'oracle':>10} {'upper':>10} {'SDR+GR':>10}  status")
    for i in range(n):
        seed = cfg.seed + i
        ch = generate_channels(params, seed)
        oracle = brute_force_oracle(params, ch).rate
        res = solve_instance(params, ch, cfg.grid, cfg.n_rand, seed, eq22_noise=cfg.eq22_noise)
        good = abs(res.rate_upper - oracle) <= ORACLE_TOL and res.rate_sdr_gr <= oracle + ORACLE_TOL
        ok &= good
        print(f"{seed:6d} {oracle:10.4f} {res.rate_upper:10.4f} {res.rate_sdr_gr:10.4f}  "
              f"{res.status} {'ok' if good else 'MISMATCH'}")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest()
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


COMMANDS = {
    "solve": cmd_solve,
    "sweep-power": cmd_sweep_power,
    "sweep-energy": cmd_sweep_energy,
    "oracle-check": cmd_oracle_check,
    "selftest": cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse errors are configuration errors
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
