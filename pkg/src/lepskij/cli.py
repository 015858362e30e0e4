"""Command-line entry point: ``lepskij {constants,nopt,simulate,tails,sweep}``.

Exit status is 0 on success, 2 when a parameter or config fails
validation and 3 on file I/O failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import analysis
from .errors import LepskijError
from .harness import (ExperimentConfig, ReportError, emit_report, loglog_slope, run_experiment,
                      summary_to_json, sweep, tail_table, run_records)
from .model import validate_params
from .schedule import Grid

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 2, 3


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _exponent_args(p):
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--omega0", type=float, required=True)
    p.add_argument("--omega", type=float, required=True)


def _config_args(p, reps=True):
    p.add_argument("--config", required=True, help="JSON experiment config")
    if reps:
        p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, dest="base_seed")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lepskij", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="sandwich constants c1..c6 and side conditions")
    _exponent_args(p)

    p = sub.add_parser("nopt", help="closed-form and empirical optimal level")
    _exponent_args(p)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--k-max", type=int, required=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    _config_args(p)
    p.add_argument("--rho", choices=["analytic", "deterministic", "split"])
    p.add_argument("--rule", choices=["fast", "classic", "both"])
    p.add_argument("--tau", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--out", help="output path (stdout if omitted)")
    p.add_argument("--format", choices=["csv", "json"])

    p = sub.add_parser("tails", help="empirical vs theoretical tail probabilities")
    _config_args(p)
    p.add_argument("--levels", type=_ints, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--json", action="store_true", help="print rows as JSON")

    p = sub.add_parser("sweep", help="per-delta summaries and the error rate slope")
    _config_args(p)
    p.add_argument("--delta-grid", type=_floats, required=True)
    p.add_argument("--no-mc", action="store_true", help="analytic columns only")
    return parser


def _cmd_constants(args) -> int:
    params = validate_params(gamma=args.gamma, lam=args.lam, epsilon=args.epsilon, eta=1.0,
                             delta=1.0, omega0=args.omega0, omega=args.omega)
    out = analysis.constants(params).as_dict()
    out["conditions"] = analysis.check_conditions(params).as_dict()
    print(json.dumps(out, indent=2))
    return EXIT_OK


def _cmd_nopt(args) -> int:
    params = validate_params(gamma=args.gamma, lam=args.lam, epsilon=args.epsilon, eta=args.eta,
                             delta=args.delta, omega0=args.omega0, omega=args.omega)
    grid = Grid.for_params(params, args.k_max)
    closed = analysis.n_opt_closed(params, grid)
    print(json.dumps({
        "s_star": closed.s_star,
        "n_opt_real": closed.n_opt_real,
        "n_opt": closed.n_opt,
        "n_opt_empirical": analysis.n_opt_empirical(params, grid),
        "n_max": grid.n_max,
    }, indent=2))
    return EXIT_OK


def _load(args, **extra) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    return cfg.with_overrides(reps=getattr(args, "reps", None), base_seed=args.base_seed,
                              workers=args.workers, **extra)


def _cmd_simulate(args) -> int:
    rho = {"analytic": "analytic-stochastic", "deterministic": "deterministic",
           "split": "split-estimate"}.get(args.rho)
    cfg = _load(args, rho_mode=rho, rule=args.rule, tau=args.tau, sigma=args.sigma,
                kappa=args.kappa, output_format=args.format, output_path=args.out)
    summary, records = run_experiment(cfg, return_records=True)
    fmt, out = cfg.output_format, cfg.output_path
    if out is None:
        emit_report(records if fmt == "csv" else summary, fmt, sys.stdout)
        return EXIT_OK
    if fmt == "csv":
        emit_report(records, "csv", out)
        out_path = Path(out)
        emit_report(summary, "json", out_path.with_name(out_path.stem + ".summary.json"))
    else:
        emit_report(summary, "json", out)
    print(f"mean ratio {summary.mean_ratio:.4g} +- {summary.ratio_se:.2g} over "
          f"{summary.reps} reps; wrote {out}", file=sys.stderr)
    return EXIT_OK


def _cmd_tails(args) -> int:
    pairs = [(n, args.tau) for n in args.levels]
    cfg = _load(args, tail_pairs=pairs)
    rows = tail_table(cfg, run_records(cfg))
    if args.json:
        print(json.dumps([asdict(r) for r in rows], indent=2))
        return EXIT_OK
    print(f"{'level':>5} {'tau':>6} {'side':>10} {'freq':>8} {'se':>8} {'bound':>10} ok")
    for r in rows:
        bound = "n/a" if r.bound is None else f"{r.bound:.4g}"
        ok = "-" if r.within is None else ("yes" if r.within else "NO")
        print(f"{r.level:>5} {r.tau:>6.3g} {r.direction:>10} {r.frequency:>8.4f} "
              f"{r.se:>8.4f} {bound:>10} {ok}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    rows = sweep(cfg, args.delta_grid, run_mc=not args.no_mc)
    out = {"rows": rows}
    if len(rows) >= 2:
        out["loglog_slope"] = loglog_slope([r["delta"] for r in rows],
                                           [r["min_expected_err_sq"] for r in rows])
        p = cfg.params
        out["predicted_slope"] = (2 * (2 * p.gamma - 1)
                                  / (2 * p.gamma + 2 * p.lam + 2 * p.epsilon))
    print(json.dumps(out, indent=2))
    return EXIT_OK


COMMANDS = {"constants": _cmd_constants, "nopt": _cmd_nopt, "simulate": _cmd_simulate,
            "tails": _cmd_tails, "sweep": _cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ReportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (LepskijError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
