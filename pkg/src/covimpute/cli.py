"""Command-line entry point: ``covimpute {generate,analyze,grid,sampling,theory}``.

Exit codes: 0 success, 2 config/parse error, 3 data error, 4 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import experiments
from .errors import CovImputeError, InvalidConfig, InvariantViolation
from .imputer import ImputationMethod
from .io import RunConfig, dataset_to_csv, dumps_report, load_config, read_dataset
from .scenario import expected_coefficient_variances, generate, theory_quantities


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--n", type=int)
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covimpute", description="Covariate imputation experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate a dataset to CSV")
    _common(p)
    p.add_argument("--oracle", action="store_true", default=None, help="also write x_full and r_x")

    p = sub.add_parser("analyze", help="impute a CSV dataset and fit the outcome model")
    _common(p)
    p.add_argument("input", help="CSV with columns z, x_obs, y")
    p.add_argument("--method", choices=["det", "det-y", "stoc", "stoc-y"])
    p.add_argument("--m", type=int, help="number of stochastic imputations (pooled when >= 2)")
    p.add_argument("--bootstrap", type=int, help="bootstrap replicates of the whole pipeline")
    p.add_argument("--na-token", dest="na_token", help="extra token meaning a missing x_obs")

    p = sub.add_parser("grid", help="missingness grid over Pr(R_X=1|Z=1)")
    _common(p)
    p.add_argument("--p", type=float, nargs="+", dest="p_grid", help="grid values")

    p = sub.add_parser("sampling", help="sampling distribution of the slope")
    _common(p)
    p.add_argument("--method", choices=["det", "det-y", "stoc", "stoc-y"])
    p.add_argument("--replications", type=int)

    p = sub.add_parser("theory", help="closed-form moments for a scenario")
    _common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(RunConfig)
        if f.name != "scenario" and getattr(args, f.name, None) is not None
    }
    if not overrides:
        return config
    values = {f.name: getattr(config, f.name) for f in dataclasses.fields(RunConfig)}
    values.update(overrides)
    return RunConfig(**values)


def _emit(text: str, out) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise InvalidConfig(f"cannot write {out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _fmt(value) -> str:
    return "n/a" if value is None else f"{value:.6g}"


def cmd_generate(args, config: RunConfig) -> int:
    data = generate(config.scenario, config.n, experiments.stream(config.seed, "generate"))
    _emit(dataset_to_csv(data, oracle=config.oracle), args.out)
    return 0


def cmd_analyze(args, config: RunConfig) -> int:
    data = read_dataset(args.input, na_token=config.na_token)
    method = ImputationMethod.from_name(config.method)
    report = experiments.analyze(data, method, config.seed, m=config.m, bootstrap=config.bootstrap, threads=config.threads)
    lines = [
        f"method: {report['method']}  n: {report['n']}  missing: {report['n_missing']}",
        f"slope estimate: {_fmt(report['estimate'])}  se: {_fmt(report['se'])}",
    ]
    if report["pooled"]:
        pooled = report["pooled"]
        lines.append(f"rubin: m={report['m']} w_bar={_fmt(pooled['w_bar'])} b={_fmt(pooled['b'])} df={_fmt(pooled['df'])}")
    if report["bootstrap"]:
        lines.append(f"bootstrap se: {_fmt(report['bootstrap']['se'])} (B={report['bootstrap']['b_count']})")
    if report["complete_case"]:
        cc = report["complete_case"]
        lines.append(f"complete case: {_fmt(cc['estimate'])}  se: {_fmt(cc['se_model'])}  n: {cc['n_used']}")
    if args.out:
        _emit(dumps_report(report), args.out)
        print("\n".join(lines))
    else:
        print("\n".join(lines), file=sys.stderr)
        sys.stdout.write(dumps_report(report))
    return 0


def cmd_grid(args, config: RunConfig) -> int:
    records = experiments.run_grid(config.scenario, config.p_grid, config.n, config.seed, threads=config.threads)
    _emit(experiments.grid_to_csv(records), args.out)
    return 0


def cmd_sampling(args, config: RunConfig) -> int:
    method = ImputationMethod.from_name(config.method)
    summary = experiments.run_sampling(
        config.scenario, method, config.n, config.replications, config.seed, threads=config.threads
    )
    _emit(dumps_report(summary), args.out)
    return 0


def theory_report(config: RunConfig) -> dict:
    tq = theory_quantities(config.scenario)
    report = {
        "schema_version": experiments.SCHEMA_VERSION,
        "command": "theory",
        "scenario": config.scenario.to_dict(),
        "quantities": dataclasses.asdict(tq),
        "invariant_failures": tq.check_invariants(),
    }
    try:
        report["expected_variances"] = dataclasses.asdict(expected_coefficient_variances(config.scenario, config.n))
        report["expected_variances"]["n"] = config.n
    except CovImputeError:
        report["expected_variances"] = None
    return report


def cmd_theory(args, config: RunConfig) -> int:
    report = theory_report(config)
    q = report["quantities"]
    lines = [
        f"Pr(R_X=1)            {_fmt(q['pr_r1'])}",
        f"E(X|R=0)             {_fmt(q['e_x_given_r0'])}",
        f"E(X|R=1)             {_fmt(q['e_x_given_r1'])}",
        f"Var(X)               {_fmt(q['var_x'])}",
        f"Var(X|R=0)           {_fmt(q['var_x_given_r0'])}",
        f"Var(Xhat_det|R=1)    {_fmt(q['var_xhat_given_r1'])}",
        f"imputation R^2       {_fmt(q['r2_imp'])}",
        f"omega                {_fmt(q['omega'])}",
    ]
    for name in ("det", "det-y", "stoc", "stoc-y"):
        lines.append(
            f"{name:<7} var {_fmt(q['imputed_var'][name]):<10} cov {_fmt(q['imputed_cov'][name]):<10}"
            f" beta1 {_fmt(q['expected_beta'][name])}"
        )
    ev = report["expected_variances"]
    if ev:
        lines.append(
            f"n={ev['n']}: full {_fmt(ev['full_cohort'])}  model-based det {_fmt(ev['model_based_det'])}"
            f"  complete case {_fmt(ev['complete_case'])}"
        )
    if args.out:
        _emit(dumps_report(report), args.out)
    print("\n".join(lines))
    if report["invariant_failures"]:
        raise InvariantViolation("; ".join(report["invariant_failures"]))
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "analyze": cmd_analyze,
    "grid": cmd_grid,
    "sampling": cmd_sampling,
    "theory": cmd_theory,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except CovImputeError as exc:
        print(f"covimpute {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
