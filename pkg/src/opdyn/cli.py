"""Command-line front end for simulation, exact analysis, and experiment sweeps.

Exit codes: 0 on success, 2 on validation errors (reported as one JSON line
on stderr), 1 on unexpected runtime errors.  OPDYN_THREADS caps the thread
pool used by the batch simulator.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .experiments import (
    _PARAM_KEYS,
    PRESETS,
    ConfigError,
    ExperimentConfig,
    ResultTable,
    preset_config,
    run_experiment,
)
from .meanfield import integrate, stubborn_equilibria
from .models import StubbornParams
from .oddsratio import threshold_beta
from .simulate import dwell_analysis

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


def _collect_params(args) -> dict:
    provided = {
        "n": args.n,
        "q0": args.q0,
        "q1": args.q1,
        "k": args.k,
        "alpha": args.alpha,
        "gamma0": args.gamma0,
        "gamma1": args.gamma1,
        "x0": args.x0,
    }
    allowed = _PARAM_KEYS[args.model]
    params = {}
    for key, value in provided.items():
        if value is None:
            continue
        if key not in allowed:
            raise ConfigError(f"flag --{key} is not valid for model '{args.model}'")
        params[key] = value
    return params


def _single_cell_config(args, measure: str) -> ExperimentConfig:
    return ExperimentConfig.from_dict(
        {
            "model": args.model,
            "measure": measure,
            "params": _collect_params(args),
            "runs": args.runs,
            "seed": args.seed,
            "horizon": args.horizon,
        }
    )


def _write_table(table: ResultTable, out: str | None):
    if out:
        table.to_csv(out)
        print(f"wrote {out}")


def _add_model_flags(sub, model_required=True):
    sub.add_argument(
        "--model", choices=("voter", "majority", "stubborn"), required=model_required
    )
    sub.add_argument("--n", type=int, help="number of agents N")
    sub.add_argument("--q0", type=float, help="update probability of opinion-0 agents")
    sub.add_argument("--q1", type=float, help="update probability of opinion-1 agents")
    sub.add_argument("--k", type=int, help="majority group half-size K (samples 2K)")
    sub.add_argument("--alpha", type=float, help="initial opinion-1 fraction")
    sub.add_argument("--gamma0", type=float, help="stubborn-0 fraction")
    sub.add_argument("--gamma1", type=float, help="stubborn-1 fraction")
    sub.add_argument("--x0", type=float, help="initial non-stubborn opinion-1 fraction")


def _add_run_flags(sub):
    sub.add_argument("--runs", type=int, default=10000, help="Monte Carlo runs")
    sub.add_argument("--seed", type=int, default=0, help="master seed")
    sub.add_argument("--horizon", type=float, default=None, help="time horizon")
    sub.add_argument("--out", type=str, default=None, help="CSV output path")


def cmd_simulate(args) -> int:
    config = _single_cell_config(args, "trajectory")
    table = run_experiment(config)
    print(
        f"simulated {args.model}: {len(table.rows) - 1} jumps, "
        f"terminal={table.provenance['terminal']}, "
        f"final x={table.rows[-1][2]:.6f} at t={table.rows[-1][0]:.6g}"
    )
    _write_table(table, args.out)
    return 0


def _cmd_mc(args, measure: str, label: str) -> int:
    config = _single_cell_config(args, measure)
    table = run_experiment(config)
    row = dict(zip(table.columns, table.rows[0]))
    extra = f" meanfield={row['meanfield']:.6g}" if "meanfield" in row else ""
    print(
        f"{label}: estimate={row['estimate']:.6g} stderr={row['stderr']:.3g} "
        f"exact={row['exact']:.6g}{extra} (runs={config.runs}, seed={config.seed})"
    )
    _write_table(table, args.out)
    return 0


def cmd_exit_prob(args) -> int:
    return _cmd_mc(args, "exit-prob", "exit probability")


def cmd_consensus_time(args) -> int:
    return _cmd_mc(args, "consensus-time", "mean consensus time")


def cmd_threshold(args) -> int:
    result = threshold_beta(args.r, args.k)
    print(
        f"beta = {result.beta:.12f} (residual {result.residual:.2e}, "
        f"{result.iterations} iterations)"
    )
    return 0


def cmd_meanfield(args) -> int:
    config = _single_cell_config(args, "trajectory")  # validates the parameters
    params = config.cell_params({})
    solution = integrate(params, t_end=args.t_end, dt=args.dt, x0=args.x0_start)
    print(
        f"mean field {args.model}: x({solution.t[-1]:.6g}) = {solution.x[-1]:.8f} "
        f"(dt={solution.dt}, max excursion {solution.max_excursion:.2e})"
    )
    if args.out:
        header = {
            "tool": "opdyn",
            "version": __version__,
            "command": "meanfield",
            "config": config.resolved() | {"t_end": args.t_end, "x0": args.x0_start},
        }
        with open(args.out, "w") as fh:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
            fh.write("t,x\n")
            for t, x in zip(solution.t, solution.x):
                fh.write(f"{t!r},{x!r}\n")
        print(f"wrote {args.out}")
    return 0


def cmd_equilibria(args) -> int:
    report = stubborn_equilibria(args.gamma0, args.gamma1)
    print(f"stubborn mean field, gamma0={args.gamma0}, gamma1={args.gamma1}:")
    for root, kind in zip(report.roots, report.stability):
        print(f"  root {root:.6f}  [{kind}]")
    print(
        f"  discriminant D = {report.discriminant_d:.6f}; "
        f"critical points z1={report.z1:.6f}, z2={report.z2:.6f}"
    )
    print(
        f"  conditions (D>0, z in (0,1), f(z1)f(z2)<=0): {report.condition_flags}"
    )
    print(f"  classification: {report.classification}")
    return 0


def cmd_dwell(args) -> int:
    params = StubbornParams(
        n_agents=args.n if args.n is not None else 100,
        gamma0=args.gamma0,
        gamma1=args.gamma1,
        x0=args.x0 if args.x0 is not None else 0.5,
    )
    horizon = args.horizon if args.horizon is not None else 1e3 * params.n_free
    report = dwell_analysis(
        params, horizon=horizon, seed=args.seed, basin_radius=args.basin_radius
    )
    roots = ", ".join(f"{r:.6f}" for r in report.basin_roots)
    print(f"basins around stable roots [{roots}], radius {report.basin_radius}")
    occ = ", ".join(f"{o:.4f}" for o in report.occupation_fraction)
    print(
        f"occupation fractions [{occ}] over horizon {report.total_time:.6g}; "
        f"{len(report.intervals)} dwell intervals, {report.switch_count} switches"
    )
    if report.no_switching_observed:
        print("no switching observed")
    if args.out:
        header = {
            "tool": "opdyn",
            "version": __version__,
            "command": "dwell",
            "gamma0": args.gamma0,
            "gamma1": args.gamma1,
            "n": params.n_agents,
            "seed": args.seed,
            "horizon": horizon,
            "basin_radius": args.basin_radius,
        }
        with open(args.out, "w") as fh:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
            fh.write("basin,t_enter,t_exit\n")
            for basin, enter, leave in report.intervals:
                fh.write(f"{basin},{enter!r},{leave!r}\n")
        print(f"wrote {args.out}")
    return 0


def cmd_run(args) -> int:
    if args.list_presets:
        for name in sorted(PRESETS):
            print(f"{name}: {PRESETS[name]['note']}")
        return 0
    if (args.preset is None) == (args.config is None):
        raise ConfigError("provide exactly one of --preset or --config")
    overrides = {"runs": args.runs, "seed": args.seed, "out": args.out}
    if args.preset:
        config = preset_config(args.preset, **overrides)
        default_stem = args.preset
    else:
        raw = tomllib.loads(Path(args.config).read_text())
        for key, value in overrides.items():
            if value is not None:
                raw[key] = value
        config = ExperimentConfig.from_dict(raw)
        default_stem = Path(args.config).stem
    table = run_experiment(config)
    out = config.out or f"{default_stem}.csv"
    table.to_csv(out)
    print(f"wrote {out} ({len(table.rows)} rows, config {config.config_hash()})")
    if not args.no_plot:
        from .plots import render_table  # matplotlib import deferred to here

        png = str(Path(out).with_suffix(".png"))
        render_table(table, png)
        print(f"wrote {png}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opdyn",
        description="Binary opinion dynamics: simulation and exact analysis",
        epilog="Environment: OPDYN_THREADS sets the batch-simulation parallelism.",
    )
    parser.add_argument("--version", action="version", version=f"opdyn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate one trajectory")
    _add_model_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exit-prob", help="Monte Carlo exit probability vs exact")
    _add_model_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_exit_prob)

    p = sub.add_parser("consensus-time", help="Monte Carlo mean consensus time vs exact")
    _add_model_flags(p)
    _add_run_flags(p)
    p.set_defaults(func=cmd_consensus_time)

    p = sub.add_parser("threshold", help="phase-transition threshold beta")
    p.add_argument("--r", type=float, required=True, help="bias ratio q1/q0 in (0, 1]")
    p.add_argument("--k", type=int, required=True, help="group half-size K")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("meanfield", help="integrate the mean-field ODE")
    _add_model_flags(p)
    p.add_argument("--x0-start", type=float, default=None, help="override x(0)")
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--runs", type=int, default=1, help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=0, help=argparse.SUPPRESS)
    p.add_argument("--horizon", type=float, default=None, help=argparse.SUPPRESS)
    p.add_argument("--out", type=str, default=None, help="CSV output path")
    p.set_defaults(func=cmd_meanfield)

    p = sub.add_parser("equilibria", help="stubborn-model equilibrium report")
    p.add_argument("--gamma0", type=float, required=True)
    p.add_argument("--gamma1", type=float, required=True)
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("dwell", help="metastable dwell analysis (stubborn model)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--gamma0", type=float, required=True)
    p.add_argument("--gamma1", type=float, required=True)
    p.add_argument("--x0", type=float, default=None)
    p.add_argument("--basin-radius", type=float, default=0.05)
    p.add_argument("--runs", type=int, default=1, help=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(func=cmd_dwell)

    p = sub.add_parser("run", help="run a config file or named preset")
    p.add_argument("--config", type=str, default=None, help="TOML experiment file")
    p.add_argument("--preset", type=str, default=None, help="named preset (figure-k)")
    p.add_argument("--list-presets", action="store_true")
    p.add_argument("--runs", type=int, default=None, help="override runs")
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.add_argument("--out", type=str, default=None, help="override output path")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG render")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(json.dumps({"error": "validation", "message": str(exc)}), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - boundary of the process
        print(json.dumps({"error": "runtime", "message": str(exc)}), file=sys.stderr)
        return 1


def entrypoint():  # console script target
    sys.exit(main())
