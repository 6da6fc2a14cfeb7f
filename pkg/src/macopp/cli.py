"""Command-line front end.

Exit status: 0 when an assisting joint plan was found, 2 when the robot cannot
help, 1 on any error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import instances
from .harness import (
    EXIT_ERROR, EXIT_FEASIBLE, EXIT_NO_ASSISTANCE, RunConfig, emit_report, format_csv,
    load_search_config, run, run_problem,
)
from .mcts import dump_tree
from .pddl import load_problem


def _add_search_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("search")
    g.add_argument("--config", help="JSON search settings (default: $MACOPP_CONFIG)")
    g.add_argument("--alpha", type=Fraction, help="weight of robot steps vs human cost, in [0, 1]")
    g.add_argument("--budget", type=int, help="joint plan length bound L")
    g.add_argument("--iterations", type=int, help="tree search iterations m")
    g.add_argument("--beta", type=Fraction, dest="reward_const", help="reward for a feasible rollout")
    g.add_argument("--phi", type=Fraction, dest="cost_const", help="cost charged to an infeasible rollout")
    g.add_argument("--exploration", type=float, help="UCT exploration constant")
    g.add_argument("--n-best", type=int, help="children kept per node at extraction")
    g.add_argument("--seed", type=int)
    g.add_argument("--count-observable-only", action="store_true", default=None,
                   help="charge only robot steps the human can observe")
    g.add_argument("--global-uct-count", action="store_true", default=None,
                   help="use the global iteration count in the UCT log term")


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("problem")
    g.add_argument("--instance", choices=sorted(instances.BUNDLED), help="use a bundled instance")
    g.add_argument("--domain-r")
    g.add_argument("--domain-h")
    g.add_argument("--problem")
    g.add_argument("--sensors")


def _search_config(args):
    keys = ("alpha", "budget", "iterations", "reward_const", "cost_const", "exploration",
            "n_best", "seed", "count_observable_only", "global_uct_count")
    overrides = {k: getattr(args, k) for k in keys}
    if args.instance and overrides["budget"] is None:
        overrides["budget"] = instances.get(args.instance).budget
    return load_search_config(args.config, **overrides)


def _paths(args) -> dict:
    if args.instance:
        paths = instances.get(args.instance).paths
        for k in paths:
            if getattr(args, k):
                paths[k] = Path(getattr(args, k))
        return paths
    missing = [f"--{k.replace('_', '-')}" for k in ("domain_r", "domain_h", "problem", "sensors")
               if not getattr(args, k)]
    if missing:
        raise ValueError(f"missing {', '.join(missing)} (or pass --instance)")
    return {k: Path(getattr(args, k)) for k in ("domain_r", "domain_h", "problem", "sensors")}


def _write(text: str, output) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_plan(args) -> int:
    cfg = RunConfig(**_paths(args), search=_search_config(args), output_format=args.format,
                    oracle=args.oracle, oracle_depth=args.oracle_depth)
    result = run(cfg)
    _write(emit_report(result, args.format, args.include_timing), args.output)
    if args.dump_tree:
        dump_tree(result.tree, args.dump_tree)
    if args.plot:
        from .plotting import plot_run
        plot_run(result, args.plot)
    return result.exit_code


def cmd_sweep(args) -> int:
    paths = _paths(args)
    problem = load_problem(paths["domain_r"], paths["domain_h"], paths["problem"], paths["sensors"])
    base = _search_config(args)
    results = [run_problem(problem, base.replace(alpha=a)) for a in args.alphas]
    _write(format_csv(results), args.output)
    if args.plot:
        from .plotting import plot_sweep
        plot_sweep(results, args.plot)
    return EXIT_FEASIBLE if any(r.metrics.feasible for r in results) else EXIT_NO_ASSISTANCE


def cmd_instances(args) -> int:
    for inst in instances.BUNDLED.values():
        print(f"{inst.name:20s} {inst.family:10s} L={inst.budget:<3d} {inst.problem} {inst.sensors}")
    return EXIT_FEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macopp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="search for a proactive assistance plan")
    _add_problem_args(p)
    _add_search_args(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")
    p.add_argument("--oracle", action="store_true", help="also run exhaustive prefix enumeration")
    p.add_argument("--oracle-depth", type=int, default=4)
    p.add_argument("--dump-tree", metavar="FILE")
    p.add_argument("--plot", metavar="FILE", help="render a belief/cost figure (png, pdf, svg)")
    p.add_argument("--include-timing", action="store_true", help="add wall time to JSON reports")
    p.set_defaults(func=cmd_plan)

    s = sub.add_parser("sweep", help="run over several alpha values, CSV out")
    _add_problem_args(s)
    _add_search_args(s)
    s.add_argument("--alphas", type=lambda t: [Fraction(x) for x in t.split(",")],
                   default=[Fraction(x, 4) for x in range(5)], help="comma separated, e.g. 0,1/2,1")
    s.add_argument("--output", "-o")
    s.add_argument("--plot", metavar="FILE")
    s.set_defaults(func=cmd_sweep)

    i = sub.add_parser("instances", help="list bundled instances")
    i.set_defaults(func=cmd_instances)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # any failure maps to the error exit status
        print(f"macopp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
