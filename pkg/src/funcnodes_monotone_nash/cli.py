"""Command line entry point ``monotone-nash``.

Exit codes: 0 success, 1 runtime or check failure, 2 usage or config error.
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import funcnodes as fn
import numpy as np

from ._types import GameName, OutputFormat, SolveMode, TikhonovMethod
from .errors import MonotoneNashError, UsageError
from .experiment import (
    load_config,
    median_distance,
    plot_runs,
    read_runs,
    run_experiment,
    write_experiment,
)
from .game import as_joint_action, registry, sample_box
from .schedules import ScheduleExponents, partial_sum_check, validate_exponents
from .smoothing import SmoothedQuery, compare_gradients
from .solvers import (
    SolverSettings,
    epsilon_schedule,
    path_increments,
    solve_tikhonov,
    solve_vi,
    tikhonov_path,
)
from .utils import LOGGER, make_rng, parse_number, parse_number_list

DEFAULT_PATH_EPSILONS = "1,0.1,0.01,0.001"


class _Reporter:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def __call__(self, *lines: str) -> None:
        if not self.quiet:
            for line in lines:
                print(line)


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="base seed")
    parser.add_argument("--out", default=default, help="output directory")
    parser.add_argument(
        "--quiet",
        action="store_true",
        default=argparse.SUPPRESS if suppress else False,
        help="only warnings and errors",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monotone-nash",
        description="Payoff-based regularized learning of Nash equilibria in monotone games.",
    )
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)
    games = [g.value for g in GameName]

    p = sub.add_parser("simulate", parents=[common], help="replicated learner runs")
    p.add_argument("config", nargs="?", help="key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--game", choices=games)
    p.add_argument("--replications", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--thinning", type=int)
    p.add_argument("--format", choices=[f.value for f in OutputFormat])
    p.add_argument("--baseline", action="store_true", help="disable the Tikhonov term")
    p.add_argument("--allow-invalid-schedule", action="store_true")

    p = sub.add_parser("check-schedule", parents=[common], help="validate exponents a b c")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("c")
    p.add_argument("--partial-sums", action="store_true", help="confirm numerically")
    p.add_argument("--t-max", type=int, default=10**6)

    p = sub.add_parser("solve", parents=[common], help="full-information reference solve")
    p.add_argument("game", choices=games)
    p.add_argument("mode", choices=[m.value for m in SolveMode])
    p.add_argument("--epsilon", default="1")
    p.add_argument("--epsilons", default=None)
    p.add_argument("--schedule-exponent", default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--tol", type=float, default=SolverSettings.tol)
    p.add_argument("--max-iters", type=int, default=SolverSettings.max_iters)
    p.add_argument(
        "--method",
        choices=[m.value for m in TikhonovMethod],
        default=TikhonovMethod.EXTRAGRADIENT.value,
    )

    p = sub.add_parser("verify-gradient", parents=[common], help="compare gradient estimators")
    p.add_argument("game", choices=games)
    p.add_argument("--sigma", default="0.3")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--mu", default=None, help="comma separated means, random if omitted")

    p = sub.add_parser("plot", parents=[common], help="SVG of a runs file")
    p.add_argument("input")
    p.add_argument("output")
    return parser


def _out_dir(args) -> Path:
    return Path(args.out) if args.out else Path(".")


# region commands


def cmd_simulate(args, report: _Reporter) -> int:
    config = load_config(args.config, args.set)
    flags = {
        "game": args.game,
        "replications": args.replications,
        "max_iters": args.max_iters,
        "thinning": args.thinning,
        "format": args.format,
        "base_seed": args.seed,
        "out": args.out,
    }
    flags = {k: v for k, v in flags.items() if v is not None}
    if args.baseline:
        flags["regularized"] = False
    if args.allow_invalid_schedule:
        flags["allow_invalid_schedule"] = True
    config = replace(config, **flags)
    result = run_experiment(config)
    paths = write_experiment(result, config.out_dir)
    summary = result.summary_frame()
    medians = median_distance(result.runs)
    report(
        summary.to_string(index=False),
        f"median final distance: {summary['final_dist'].median():.6g}",
        f"median distance at t={int(medians.index[-1])}: {medians.iloc[-1]:.6g}",
        *(f"wrote {p}" for p in paths.values()),
    )
    return 0


def cmd_check_schedule(args, report: _Reporter) -> int:
    exponents = ScheduleExponents(*(parse_number(v) for v in (args.a, args.b, args.c)))
    result = validate_exponents(exponents)
    report(f"exponents a b c = {exponents}", *result.lines())
    agrees = True
    if args.partial_sums:
        sums = partial_sum_check(exponents, args.t_max)
        agrees = bool(sums["agrees"].all())
        report(sums.to_string(index=False))
    report("all conditions hold" if result.passed else "schedule is invalid")
    return 0 if result.passed and agrees else 1


def _path_epsilons(args) -> List[float]:
    if args.schedule_exponent is not None:
        if args.steps is None:
            raise UsageError("--schedule-exponent needs --steps")
        return epsilon_schedule(parse_number(args.schedule_exponent), args.steps)
    return parse_number_list(args.epsilons or DEFAULT_PATH_EPSILONS)


def cmd_solve(args, report: _Reporter) -> int:
    game = registry(args.game)
    settings = SolverSettings(tol=args.tol, max_iters=args.max_iters)
    payload = {"game": game.name, "mode": args.mode, "tol": settings.tol}
    if args.mode == SolveMode.VI.value:
        result = solve_vi(game, settings)
        payload.update(
            y=result.y.reshape(-1).tolist(),
            residual=result.residual,
            iterations=result.iterations,
            step=result.step,
        )
        report(f"VI solution of {game.name}: {result.y.reshape(-1)} (residual {result.residual:.3e})")
    elif args.mode == SolveMode.TIKHONOV.value:
        point = solve_tikhonov(game, parse_number(args.epsilon), settings, args.method)
        payload.update(
            epsilon=point.epsilon,
            method=args.method,
            y=point.y.reshape(-1).tolist(),
            residual=point.residual,
            iterations=point.iterations,
            step=point.step,
        )
        report(
            f"y({point.epsilon:g}) of {game.name}: {point.y.reshape(-1)} "
            f"(residual {point.residual:.3e})"
        )
    else:
        path = tikhonov_path(game, _path_epsilons(args), settings, args.method)
        increments = path_increments(path)
        payload.update(
            method=args.method,
            points=path.to_frame().to_dict(orient="records"),
            m_y=path.m_y,
            limit=path.limit.reshape(-1).tolist(),
            increments=increments.to_dict(orient="records"),
        )
        report(
            path.to_frame().to_string(index=False),
            f"M_y = {path.m_y:.6g}",
            f"limit: {path.limit.reshape(-1)}",
            f"increment bound holds at every step: {bool(increments['holds'].all())}",
        )
    out = _out_dir(args) / "solve.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=2, cls=fn.JSONEncoder) + "\n", encoding="utf-8")
    report(f"wrote {out}")
    return 0


def cmd_verify_gradient(args, report: _Reporter) -> int:
    game = registry(args.game)
    seed = 0 if args.seed is None else args.seed
    if args.mu is None:
        mu = sample_box(game, make_rng([seed, 2]), 1)[0]
    else:
        mu = as_joint_action(game, parse_number_list(args.mu))
    query = SmoothedQuery(game, mu, parse_number(args.sigma), args.samples, seed)
    table = compare_gradients(query)
    ok = bool(table["within"].all())
    report(
        f"mu = {np.asarray(mu).reshape(-1)}, sigma = {query.sigma:g}, samples = {query.n_samples}",
        table.to_string(index=False),
        "all estimators agree within 3 standard errors" if ok else "estimators disagree",
    )
    return 0 if ok else 1


def cmd_plot(args, report: _Reporter) -> int:
    plot_runs(read_runs(args.input), args.output)
    report(f"wrote {args.output}")
    return 0


# endregion commands

COMMANDS = {
    "simulate": cmd_simulate,
    "check-schedule": cmd_check_schedule,
    "solve": cmd_solve,
    "verify-gradient": cmd_verify_gradient,
    "plot": cmd_plot,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.quiet:
        LOGGER.setLevel(logging.WARNING)
    report = _Reporter(args.quiet)
    try:
        return COMMANDS[args.command](args, report)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (MonotoneNashError, RuntimeError) as exc:
        LOGGER.exception("monotone-nash %s failed", args.command)
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
