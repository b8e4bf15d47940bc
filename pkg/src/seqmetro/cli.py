"""Command-line front end writing CSV/JSON scan data.

Commands: thermo-scan, thermo-coarse, thermo-feedback, rabi-scan, verify,
montecarlo. Values in a ``--config`` JSON file (keys are the long flag
names with dashes or underscores) are overridden by explicit flags.
Exit status: 0 success, 1 numeric failure, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

import numpy as np

from .chain import DegenerateChainError
from .estimate import ESTIMATORS, EstimationError, monte_carlo
from .models import (RabiModel, ThermometryModel, rabi_fisher, thermal_distribution, thermal_fi,
                     thermo_fisher, thermo_transition_analytic)
from .scan import Axis, ScanGrid, scan_1d, thermo_f_sharp, thermo_f_star
from .verify import SUITES, run_suites

THERMO_SCAN_COLUMNS = ["gtau", "f21_ratio", "f21_g_ratio", "f21_e_ratio", "flags"]
FEEDBACK_COLUMNS = ["levels", "nbar", "f_th", "f_star", "tau_star", "f_sharp", "tau_g", "tau_e",
                    "ratio", "tau_ratio", "flags"]
RABI_COLUMNS = ["gtau", "f21", "f21_0", "f21_1", "flags"]

DEFAULTS = {
    "format": "csv",
    "out": "-",
    "seed": 20240601,
    "levels": "4",
    "nbar": "1.0",
    "omega": 0.2,
    "basis": "computational",
    "tau_min": None,
    "tau_max": None,
    "tau_points": None,
    "tau_log": None,
    "nbar_min": None,
    "nbar_max": None,
    "nbar_points": None,
    "coarse": False,
    "suite": None,
    "n_max": 8,
    "perturb_f": 0.0,
    "tau": None,
    "n_steps": 10_000,
    "n_traj": 500,
    "estimator": "mle",
    "bracket": "0.05,20",
}

# per-command grid defaults
TAU_DEFAULTS = {
    "thermo-scan": (0.05, 20.0, 200, True),
    "thermo-coarse": (0.05, 20.0, 200, True),
    "rabi-scan": (0.01, 10.0, 1000, False),
}
COMMAND_DEFAULTS = {
    "montecarlo": {"levels": "2", "nbar": "1.0"},
    "thermo-feedback": {"levels": "3,4,5,6"},
}


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return float(format(v, ".17g")) if np.isfinite(v) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqmetro", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    common.add_argument("--out", help="output path, '-' for stdout (default)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--seed", type=int)
    common.add_argument("--config", help="JSON file with default option values")

    model = argparse.ArgumentParser(add_help=False, argument_default=S)
    model.add_argument("--levels", help="probe dimension D (comma list for thermo-feedback)")
    model.add_argument("--nbar", help="mean occupation (comma list for thermo-feedback)")
    model.add_argument("--omega", type=float, help="Rabi frequency Omega/gamma")
    model.add_argument("--basis", help="computational | sigma_x | sigma_y | 'theta,phi'")

    grid = argparse.ArgumentParser(add_help=False, argument_default=S)
    grid.add_argument("--tau-min", type=float)
    grid.add_argument("--tau-max", type=float)
    grid.add_argument("--tau-points", type=int)
    grid.add_argument("--tau-log", action=argparse.BooleanOptionalAction)

    for name, hlp in [("thermo-scan", "F21 ratios vs gamma*tau, full energy basis"),
                      ("thermo-coarse", "F21 ratios vs gamma*tau, coarse-grained measurement"),
                      ("rabi-scan", "F21 vs gamma*tau for the driven qubit")]:
        sub.add_parser(name, parents=[common, model, grid], help=hlp, argument_default=S)

    fb = sub.add_parser("thermo-feedback", parents=[common, model, grid], argument_default=S,
                        help="F* and F# (outcome-conditioned waiting times) vs nbar")
    fb.add_argument("--nbar-min", type=float)
    fb.add_argument("--nbar-max", type=float)
    fb.add_argument("--nbar-points", type=int)
    fb.add_argument("--coarse", action=argparse.BooleanOptionalAction)

    ver = sub.add_parser("verify", parents=[common], argument_default=S,
                         help="run the identity / oracle suites")
    ver.add_argument("--suite", action="append", choices=SUITES)
    ver.add_argument("--n-max", type=int)
    ver.add_argument("--perturb-f", type=float, help=S)

    mc = sub.add_parser("montecarlo", parents=[common, model], argument_default=S,
                        help="Monte-Carlo check of the Cramer-Rao rate")
    mc.add_argument("--tau", type=float, help="waiting time; default is the F* optimum")
    mc.add_argument("--n-steps", type=int, help="outcomes per trajectory N")
    mc.add_argument("--n-traj", type=int)
    mc.add_argument("--estimator", choices=ESTIMATORS)
    mc.add_argument("--bracket", help="'lo,hi' search interval for nbar")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults < command defaults < config file < explicit flags."""
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS.get(args.command, {}))
    if args.command in TAU_DEFAULTS:
        cfg.update(zip(("tau_min", "tau_max", "tau_points", "tau_log"), TAU_DEFAULTS[args.command]))
    given = vars(args)
    if given.get("config"):
        try:
            with open(given["config"]) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        for k, v in data.items():
            key = k.replace("-", "_")
            if key not in cfg:
                raise ConfigError(f"unknown config key {k!r}")
            cfg[key] = v
    for k, v in given.items():
        if k not in ("config",):
            cfg[k] = v
    return cfg


def _floats(v, name) -> list[float]:
    try:
        if isinstance(v, (int, float)):
            return [float(v)]
        if isinstance(v, (list, tuple)):
            return [float(x) for x in v]
        return [float(x) for x in str(v).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--{name} expects numbers, got {v!r}")


def _ints(v, name) -> list[int]:
    vals = _floats(v, name)
    if any(x != int(x) for x in vals):
        raise ConfigError(f"--{name} expects integers, got {v!r}")
    return [int(x) for x in vals]


def _tau_grid(cfg) -> ScanGrid:
    try:
        return ScanGrid((Axis("gtau", float(cfg["tau_min"]), float(cfg["tau_max"]),
                              int(cfg["tau_points"]), "log" if cfg["tau_log"] else "linear"),))
    except ValueError as exc:
        raise ConfigError(str(exc))


def _thermo_model(cfg, coarse=False) -> ThermometryModel:
    levels = _ints(cfg["levels"], "levels")
    nbar = _floats(cfg["nbar"], "nbar")
    if len(levels) != 1 or len(nbar) != 1:
        raise ConfigError("this command takes a single --levels and --nbar value")
    try:
        return ThermometryModel(levels[0], nbar[0], "coarse" if coarse else "full")
    except ValueError as exc:
        raise ConfigError(str(exc))


def _basis(cfg):
    b = cfg["basis"]
    if isinstance(b, (list, tuple)):
        return tuple(float(x) for x in b)
    if "," in str(b):
        return tuple(_floats(b, "basis"))
    return str(b)


def _flags(flags) -> str:
    return ";".join(dict.fromkeys(flags))


def cmd_thermo_scan(cfg, coarse=False):
    m = _thermo_model(cfg, coarse)
    grid = scan_1d(lambda t: thermo_fisher(m, t, t), _tau_grid(cfg))
    fth = thermal_fi(m.D, m.nbar)
    rows = []
    for r in grid.records:
        rep = r.result
        if rep is None:
            raise ArithmeticError(f"evaluation failed at gtau={r.point[0]}: {r.error}")
        rows.append([r.point[0], rep.F_2g1 / fth, rep.F_2g1_by_prev[0] / fth,
                     rep.F_2g1_by_prev[1] / fth, _flags(r.flags)])
    meta = {"command": "thermo-coarse" if coarse else "thermo-scan", "levels": m.D, "nbar": m.nbar,
            "f_th": fth}
    return THERMO_SCAN_COLUMNS, rows, meta


def _nbar_values(cfg) -> list[float]:
    if cfg.get("nbar_min") is not None or cfg.get("nbar_max") is not None:
        try:
            ax = Axis("nbar", float(cfg["nbar_min"]), float(cfg["nbar_max"]),
                      int(cfg.get("nbar_points") or 20), "log")
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad nbar grid: {exc}")
        return [float(x) for x in ax.values()]
    return _floats(cfg["nbar"], "nbar")


def cmd_thermo_feedback(cfg):
    levels = _ints(cfg["levels"], "levels")
    nbars = _nbar_values(cfg)
    if not levels or not nbars:
        raise ConfigError("empty levels or nbar grid")
    grid = _tau_grid({**cfg, **{k: v for k, v in zip(("tau_min", "tau_max", "tau_points", "tau_log"),
                                                      (0.01, 40.0, 200, True))
                                 if cfg.get(k) is None}})
    rows = []
    for D in levels:
        for nb in nbars:
            try:
                m = ThermometryModel(D, nb, "coarse" if cfg["coarse"] else "full")
            except ValueError as exc:
                raise ConfigError(str(exc))
            star = thermo_f_star(m, grid)
            sharp = thermo_f_sharp(m, star)
            flags = [f"star-{f}" for f in star.flags] + [f"sharp-{f}" for f in sharp.flags]
            tg, te = sharp.argmax
            rows.append([D, nb, thermal_fi(D, nb), star.value, star.argmax[0], sharp.value, tg, te,
                         sharp.value / star.value, tg / te if te > 0 else float("inf"), _flags(flags)])
    meta = {"command": "thermo-feedback", "coarse": bool(cfg["coarse"])}
    return FEEDBACK_COLUMNS, rows, meta


def cmd_rabi_scan(cfg):
    try:
        base = RabiModel(float(cfg["omega"]), 1.0, _basis(cfg))
    except ValueError as exc:
        raise ConfigError(str(exc))
    grid = _tau_grid(cfg)
    if grid.axes[0].min <= 0:
        raise ConfigError("rabi-scan needs --tau-min > 0")
    res = scan_1d(lambda t: rabi_fisher(RabiModel(base.omega, t, base.basis)), grid)
    rows = []
    for r in res.records:
        rep = r.result
        if rep is None:
            raise ArithmeticError(f"evaluation failed at gtau={r.point[0]}: {r.error}")
        rows.append([r.point[0], rep.F_2g1, rep.F_2g1_by_prev[0], rep.F_2g1_by_prev[1], _flags(r.flags)])
    meta = {"command": "rabi-scan", "omega": base.omega, "basis": list(base.basis)
            if isinstance(base.basis, tuple) else base.basis}
    return RABI_COLUMNS, rows, meta


def cmd_verify(cfg) -> tuple[dict, int]:
    suites = cfg["suite"] or list(SUITES)
    results = run_suites(suites, n_max=int(cfg["n_max"]), perturb_f=float(cfg["perturb_f"]))
    ok = all(r["passed"] for r in results)
    failed = [f'{r["suite"]}: {r["name"]}' for r in results if not r["passed"]]
    return {"command": "verify", "passed": ok, "failed": failed, "checks": results}, 0 if ok else 1


def cmd_montecarlo(cfg) -> dict:
    m = _thermo_model(cfg)
    n_traj, N = int(cfg["n_traj"]), int(cfg["n_steps"])
    if n_traj < 2:
        raise ConfigError("--n-traj must be >= 2 (variance undefined)")
    if N < 2:
        raise ConfigError("--n-steps must be >= 2")
    bracket = _floats(cfg["bracket"], "bracket")
    if len(bracket) != 2 or not 0 < bracket[0] < m.nbar < bracket[1]:
        raise ConfigError("--bracket must be 'lo,hi' with 0 < lo < nbar < hi")
    if cfg["tau"] is None:
        tau = thermo_f_star(m).argmax[0]
    else:
        tau = float(cfg["tau"])
        if not tau > 0:
            raise ConfigError("--tau must be positive")
    m = m.with_taus(tau)
    F21 = thermo_fisher(m, cross_check=False).F_2g1

    def model(nb):
        mm = m.with_nbar(nb)
        return thermo_transition_analytic(mm), thermal_distribution(mm.D, nb)[0]
    rep = monte_carlo(model, m.nbar, cfg["estimator"], N, n_traj, int(cfg["seed"]),
                      tuple(bracket), F_2g1=F21)
    return {"command": "montecarlo", "levels": m.D, "gtau": tau, **rep.as_dict()}


def write_table(columns, rows, meta, fmt_name, out):
    if fmt_name == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
        text = buf.getvalue()
    else:
        text = json.dumps(_jsonable({**meta, "columns": columns,
                                     "rows": [dict(zip(columns, r)) for r in rows]}), indent=1) + "\n"
    _emit(text, out)


def write_json(obj, out):
    _emit(json.dumps(_jsonable(obj), indent=1, sort_keys=False) + "\n", out)


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        cmd = args.command
        if cmd in ("thermo-scan", "thermo-coarse"):
            write_table(*cmd_thermo_scan(cfg, coarse=cmd == "thermo-coarse"), cfg["format"], cfg["out"])
        elif cmd == "thermo-feedback":
            write_table(*cmd_thermo_feedback(cfg), cfg["format"], cfg["out"])
        elif cmd == "rabi-scan":
            write_table(*cmd_rabi_scan(cfg), cfg["format"], cfg["out"])
        elif cmd == "verify":
            report, code = cmd_verify(cfg)
            write_json(report, cfg["out"])
            for name in report["failed"]:
                print(f"FAILED: {name}", file=sys.stderr)
            return code
        elif cmd == "montecarlo":
            write_json(cmd_montecarlo(cfg), cfg["out"])
    except ConfigError as exc:
        print(f"seqmetro: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"seqmetro: error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateChainError, EstimationError, ArithmeticError, np.linalg.LinAlgError,
            ValueError) as exc:
        print(f"seqmetro: numeric failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
