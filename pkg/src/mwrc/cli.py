"""Command-line driver for rate, energy-efficiency and game sweeps.

Every sweep writes one CSV file with a block of ``#`` metadata lines and a
small matplotlib script that plots it.  Exit codes: 0 success, 1 failed
check or solver failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__, rates
from .core import MwrcError, PowerLimits, Scheme, SymmetricChannel, snr_db_to_linear
from .game import GameSpec, brd
from .gee import PowerCost
from .power_model import LinkBudget
from .verify import CHECKS, b2b_gee, cooperative_gee

logger = logging.getLogger("mwrc")

OUTPUT_ENV = "MWRC_OUTPUT_DIR"
COLUMNS = ("snr_db", "scheme", "solver", "sum_rate_bps_hz", "gee", "p_s_w", "p_r_w",
           "iterations", "branch")

DEFAULT_RANGES = {
    "rates": (-10.0, 40.0, 0.5),
    "gee-coop": (0.0, 30.0, 1.0),
    "game": (0.0, 30.0, 1.0),
    "b2b": (-10.0, 40.0, 1.0),
}


DEFAULT_JOBS = min(8, os.cpu_count() or 1)


class ConfigError(MwrcError):
    pass


# ---------------------------------------------------------------- helpers


def snr_grid(start: float, stop: float, step: float) -> List[float]:
    if not step > 0:
        raise ConfigError("snr step must be > 0")
    if stop < start:
        raise ConfigError("snr stop must be >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(n)]


def parse_schemes(text: str) -> List[Scheme]:
    try:
        out = [Scheme.parse(s.strip()) for s in text.split(",") if s.strip()]
    except MwrcError as exc:
        raise ConfigError(str(exc)) from exc
    if not out:
        raise ConfigError("no schemes given")
    return out


def read_config(path: str) -> Dict[str, str]:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    values: Dict[str, str] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _row(snr_db, scheme, solver, rate=None, gee=None, p_s=None, p_r=None, iterations=None,
         branch=None) -> dict:
    def fmt(x):
        if x is None:
            return ""
        if isinstance(x, float):
            return f"{x:.12g}"
        return str(x)

    vals = (snr_db, scheme, solver, rate, gee, p_s, p_r, iterations, branch)
    return {k: fmt(v) for k, v in zip(COLUMNS, vals)}


# ---------------------------------------------------------------- sweep points
# module-level so that they can run in worker processes


def _rates_point(task):
    snr_db, schemes, noise = task
    ch = SymmetricChannel.completely_symmetric(snr_db_to_linear(snr_db), noise)
    rows = []
    for s in schemes:
        r = rates.sum_rate(s, ch)
        rows.append(_row(snr_db, str(s), "closed_form", r.value,
                         p_s=ch.p_s, p_r=ch.p_r, branch=r.active_branch))
    return rows


def _coop_rows(snr_db, scheme, cost, limits, noise, solvers, scale=1.0, label=None):
    from .gee import params_for, numerator

    rows = []
    params = params_for(scheme, noise, noise)
    for solver in solvers:
        if scheme in (Scheme.OUTER_BOUND, Scheme.DF):
            if solver == "monotonic":
                continue
            solver = "dinkelbach"
        gee, prof, iters = cooperative_gee(scheme, cost, limits, noise,
                                           "monotonic" if solver == "monotonic" else "alternating")
        rate = numerator(params, prof.p_s, prof.p_r, noise, noise)
        rows.append(_row(snr_db, label or str(scheme), solver, rate, gee * scale,
                         prof.p_s, prof.p_r, iters))
    return rows


def _coop_point(task):
    snr_db, schemes, noise, cost, solvers = task
    limits = PowerLimits.symmetric(snr_db_to_linear(snr_db) * noise)
    rows = []
    for s in schemes:
        rows += _coop_rows(snr_db, s, cost, limits, noise, solvers)
    return rows


def _game_point(task):
    snr_db, schemes, noise, cost, inits = task
    limits = PowerLimits.symmetric(snr_db_to_linear(snr_db) * noise)
    rows = []
    for s in schemes:
        spec = GameSpec.for_scheme(s, cost, limits, noise, noise)
        rows += _coop_rows(snr_db, s, cost, limits, noise, ["alternating"])
        rows[-1]["solver"] = "cooperative"
        for frac in inits:
            tr = brd(spec, p_r_init=frac * limits.p_r_max)
            p_s, p_r = tr.sequence[-1][:2]
            rows.append(_row(snr_db, str(s), f"brd_init_{frac:g}", spec.rate(p_s, p_r),
                             spec.gee(p_s, p_r), p_s, p_r, tr.iterations))
    return rows


def _b2b_point(task):
    snr_db, schemes, lb, solvers, pessimistic = task
    rows = []
    variants = [(s, False, str(s)) for s in schemes]
    if pessimistic and Scheme.NNC in schemes:
        variants.append((Scheme.NNC, True, "NNC-pessimistic"))
    noise = lb.effective_noise()
    from .gee import numerator, params_for

    for scheme, pess, label in variants:
        for solver in solvers:
            if scheme in (Scheme.OUTER_BOUND, Scheme.DF):
                if solver == "monotonic":
                    continue
                name = "dinkelbach"
            else:
                name = solver
            gee, prof, iters = b2b_gee(scheme, snr_db, lb, pess, solver)
            rate = numerator(params_for(scheme, noise, noise), prof.p_s, prof.p_r, noise, noise)
            rows.append(_row(snr_db, label, name, rate, gee, prof.p_s, prof.p_r, iters))
    return rows


def run_tasks(fn, tasks: Sequence, jobs: int) -> List[dict]:
    """Evaluate sweep points, concurrently if ``jobs > 1``, keeping the task order."""
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(fn, tasks))
    else:
        results = [fn(t) for t in tasks]
    return [row for rows in results for row in rows]


# ---------------------------------------------------------------- output


PLOT_TEMPLATE = '''"""Plot {csv_name}; run with python3."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(lambda: ([], []))
with open({csv_path!r}) as fh:
    rows = csv.DictReader(line for line in fh if not line.startswith("#"))
    for row in rows:
        if row[{y!r}] == "":
            continue
        xs, ys = series[(row["scheme"], row["solver"])]
        xs.append(float(row["snr_db"]))
        ys.append(float(row[{y!r}]))

fig, ax = plt.subplots()
for (scheme, solver), (xs, ys) in series.items():
    ax.plot(xs, ys, label=f"{{scheme}} ({{solver}})")
ax.set_xlabel({xlabel!r})
ax.set_ylabel({ylabel!r})
ax.grid(True)
ax.legend()
fig.savefig({png_path!r}, dpi=150)
'''


def write_outputs(out_dir: Path, name: str, rows: Iterable[dict], meta: Dict[str, object],
                  y: str, xlabel: str, ylabel: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{name}.csv"
    with open(csv_path, "w", newline="") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}: {v}\n")
        writer = csv.DictWriter(fh, fieldnames=COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    plot = PLOT_TEMPLATE.format(csv_name=csv_path.name, csv_path=str(csv_path.resolve()), y=y,
                                xlabel=xlabel, ylabel=ylabel,
                                png_path=str((out_dir / f"{name}.png").resolve()))
    (out_dir / f"{name}_plot.py").write_text(plot)
    return csv_path


# ---------------------------------------------------------------- commands


def _common_meta(args, command: str) -> Dict[str, object]:
    # no timestamps: the file must be identical for identical configs
    meta = {"tool": f"mwrc {__version__}", "command": command}
    for k, v in sorted(vars(args).items()):
        if k not in ("func", "command", "config"):
            meta[f"config.{k}"] = v
    return meta


def _cost_from_args(args) -> PowerCost:
    try:
        return PowerCost(phi=args.phi, psi=args.psi, p_c=args.p_c, p_c_s=args.p_c_s,
                         p_c_r=args.p_c_r)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_rates(args) -> int:
    schemes = parse_schemes(args.schemes)
    if not args.noise > 0:
        raise ConfigError("noise must be > 0")
    tasks = [(x, schemes, args.noise) for x in snr_grid(args.snr_start, args.snr_stop, args.snr_step)]
    rows = run_tasks(_rates_point, tasks, args.jobs)
    meta = _common_meta(args, "rates")
    meta["snr"] = "completely symmetric channel, P_S = P_R = SNR * N, N_S = N_R = N"
    path = write_outputs(args.out_dir, args.name or "rates", rows, meta, "sum_rate_bps_hz",
                         "SNR [dB]", "sum rate [bit/s/Hz]")
    print(path)
    return 0


def _solvers(text: str) -> List[str]:
    if text == "both":
        return ["alternating", "monotonic"]
    if text in ("alternating", "monotonic"):
        return [text]
    raise ConfigError(f"unknown solver {text!r}")


def cmd_gee_coop(args) -> int:
    schemes = parse_schemes(args.schemes)
    if not args.noise > 0:
        raise ConfigError("noise must be > 0")
    cost = _cost_from_args(args)
    solvers = _solvers(args.solver)
    tasks = [(x, schemes, args.noise, cost, solvers)
             for x in snr_grid(args.snr_start, args.snr_stop, args.snr_step)]
    rows = run_tasks(_coop_point, tasks, args.jobs)
    meta = _common_meta(args, "gee-coop")
    meta["snr"] = "SNR^max = P^max / N with P_S^max = P_R^max = P^max"
    meta["gee_unit"] = "bit/J per Hz of bandwidth"
    path = write_outputs(args.out_dir, args.name or "gee_coop", rows, meta, "gee",
                         "SNR^max [dB]", "GEE [bit/J/Hz]")
    print(path)
    return 0


def cmd_game(args) -> int:
    schemes = parse_schemes(args.schemes)
    if not args.noise > 0:
        raise ConfigError("noise must be > 0")
    cost = _cost_from_args(args)
    try:
        inits = [float(x) for x in args.inits.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad init list {args.inits!r}") from exc
    if not inits or any(not 0.0 <= x <= 1.0 for x in inits):
        raise ConfigError("inits are fractions of P^max in [0, 1]")
    tasks = [(x, schemes, args.noise, cost, inits)
             for x in snr_grid(args.snr_start, args.snr_stop, args.snr_step)]
    rows = run_tasks(_game_point, tasks, args.jobs)
    meta = _common_meta(args, "game")
    meta["snr"] = "SNR^max = P^max / N"
    meta["solver_column"] = ("cooperative = cooperative optimum; brd_init_x = best-response dynamics "
                             "started from relay power x * P^max, sources first")
    path = write_outputs(args.out_dir, args.name or "game", rows, meta, "gee",
                         "SNR^max [dB]", "GEE [bit/J/Hz]")
    print(path)
    return 0


def cmd_b2b(args) -> int:
    schemes = parse_schemes(args.schemes)
    try:
        lb = LinkBudget(args.gain_db, args.bandwidth, args.temperature)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    solvers = _solvers(args.solver)
    tasks = [(x, schemes, lb, solvers, args.pessimistic_nnc)
             for x in snr_grid(args.snr_start, args.snr_stop, args.snr_step)]
    rows = run_tasks(_b2b_point, tasks, args.jobs)
    meta = _common_meta(args, "b2b")
    meta["snr"] = ("received SNR at full power: P^max * gain / (k_B T B); "
                   f"noise referred to the transmitter {lb.effective_noise():.6g} W")
    meta["gee_unit"] = "bit/J (per-Hz GEE times bandwidth)"
    meta["outer_bound_cost"] = "the outer bound uses the DF circuit power as reference"
    path = write_outputs(args.out_dir, args.name or "b2b", rows, meta, "gee",
                         "SNR^max [dB]", "GEE [bit/J]")
    print(path)
    return 0


def cmd_verify(args) -> int:
    names = args.check or list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown check(s): {', '.join(unknown)}; known: {', '.join(CHECKS)}")
    failed = 0
    for name in names:
        res = CHECKS[name]()
        print(res.line(), flush=True)
        failed += not res.passed
    print(f"{len(names) - failed}/{len(names)} checks passed")
    return 1 if failed else 0


# ---------------------------------------------------------------- parser


def _add_sweep(p, command: str, schemes: str):
    start, stop, step = DEFAULT_RANGES[command]
    p.add_argument("--snr-start", type=float, default=start, help="first SNR in dB")
    p.add_argument("--snr-stop", type=float, default=stop, help="last SNR in dB (inclusive)")
    p.add_argument("--snr-step", type=float, default=step, help="SNR step in dB")
    p.add_argument("--schemes", default=schemes, help="comma-separated scheme list")
    p.add_argument("--name", default=None, help="base name of the output files")
    p.add_argument("--jobs", type=int, default=DEFAULT_JOBS, help="worker processes")


def _add_cost(p, p_c_s: float, p_c_r: float):
    p.add_argument("--phi", type=float, default=3.0, help="source amplifier inefficiency (all users)")
    p.add_argument("--psi", type=float, default=1.0, help="relay amplifier inefficiency")
    p.add_argument("--p-c", type=float, default=1.0, help="total circuit power in W")
    p.add_argument("--p-c-s", type=float, default=p_c_s, help="circuit power of the sources in W")
    p.add_argument("--p-c-r", type=float, default=p_c_r, help="circuit power of the relay in W")


def build_parser() -> argparse.ArgumentParser:
    all_schemes = ",".join(str(s) for s in (Scheme.OUTER_BOUND, Scheme.NNC, Scheme.AF_SND,
                                            Scheme.AF_IAN, Scheme.DF))
    parser = argparse.ArgumentParser(prog="mwrc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mwrc {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
        p.add_argument("--out-dir", type=Path, default=None,
                       help=f"output directory (default ${OUTPUT_ENV} or the current directory)")
        p.set_defaults(func=func)
        return p

    p = add("rates", cmd_rates, "sum rates on the completely symmetric channel")
    _add_sweep(p, "rates", all_schemes)
    p.add_argument("--noise", type=float, default=1.0, help="noise power N in W")

    p = add("gee-coop", cmd_gee_coop, "cooperative GEE maximisation over SNR^max")
    _add_sweep(p, "gee-coop", all_schemes)
    p.add_argument("--noise", type=float, default=1.0, help="noise power N in W")
    p.add_argument("--solver", default="both", choices=("alternating", "monotonic", "both"))
    _add_cost(p, 0.75, 0.25)

    p = add("game", cmd_game, "competitive power control against the cooperative optimum")
    _add_sweep(p, "game", "NNC,AfSnd,AfIan,DF")
    p.add_argument("--noise", type=float, default=1.0, help="noise power N in W")
    p.add_argument("--inits", default="0,0.1,0.5,1", help="relay start powers as fractions of P^max")
    _add_cost(p, 0.75, 0.25)

    p = add("b2b", cmd_b2b, "GEE of the 200 GHz board-to-board link")
    _add_sweep(p, "b2b", all_schemes)
    p.add_argument("--solver", default="alternating", choices=("alternating", "monotonic", "both"))
    p.add_argument("--gain-db", type=float, default=-65.8, help="channel power gain in dB")
    p.add_argument("--bandwidth", type=float, default=25e9, help="bandwidth in Hz")
    p.add_argument("--temperature", type=float, default=290.0, help="noise temperature in K")
    p.add_argument("--pessimistic-nnc", action=argparse.BooleanOptionalAction, default=True,
                   help="add NNC with the pessimistic decoder power")

    p = add("verify", cmd_verify, "run the named numerical checks")
    p.add_argument("--check", action="append", help="run only this check (repeatable)")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    actions = {a.dest: a for a in sub._actions}  # noqa: SLF001
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise ConfigError(f"unknown config key {key!r} for '{args.command}'")
        if action.nargs == 0 or isinstance(action, argparse.BooleanOptionalAction):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{key} expects a boolean, got {raw!r}")
            defaults[key] = low in ("true", "1", "yes")
        elif action.type is not None:
            try:
                defaults[key] = action.type(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        else:
            defaults[key] = raw
        if action.choices is not None and defaults[key] not in action.choices:
            raise ConfigError(f"{key} must be one of {sorted(action.choices)}")
    sub.set_defaults(**defaults)
    # parse again so that explicit flags override the file
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"mwrc: config error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "out_dir", None) is None:
        args.out_dir = Path(os.environ.get(OUTPUT_ENV, "."))
    if getattr(args, "jobs", 1) < 1:
        print("mwrc: config error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"mwrc: config error: {exc}", file=sys.stderr)
        return 2
    except MwrcError as exc:
        print(f"mwrc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
