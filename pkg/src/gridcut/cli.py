"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .attack import OPTIMAL, optimal_attack, verify_hidden
from .errors import ParseError, RankError, TooLargeError, ValidationError, VerificationFailure
from .experiments import ENGINES, SWEEP_PARAMS, ScenarioConfig, randomize_scenario, run_sweep, write_csv
from .graph import attack_graph
from .grid import Scenario, load_case, load_scenario, save_scenario
from .oracle import brute_force_attack, l1_attack
from .planner import greedy_pmu, greedy_protect

EXIT_INVALID = 2
EXIT_VERIFY = 3


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", help="bundled case name (case14, case30, case57, case118) or MATPOWER/JSON path")
    p.add_argument("--scenario", help="native scenario JSON (topology + measurements)")
    p.add_argument("--dump-graph", nargs="?", const="-", metavar="PATH", help="write the contracted attack graph as DOT")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--angle-coverage", type=float, default=0.6)
    p.add_argument("--flow-coverage", type=float, default=1.0)
    p.add_argument("--protect-fraction", type=float, default=0.0)
    p.add_argument("--pmu-count", type=int, default=0)
    p.add_argument("--insecure-pmus", action="store_true", help="randomly placed PMUs are insecure")
    p.add_argument("--trial", type=int, default=0, help="trial sub-stream used to randomise a --case scenario")


def _config(args) -> ScenarioConfig:
    return ScenarioConfig(
        case=args.case,
        flow_coverage=args.flow_coverage,
        angle_coverage=args.angle_coverage,
        protect_fraction=args.protect_fraction,
        pmu_count=args.pmu_count,
        pmu_secure=not args.insecure_pmus,
        seed=args.seed,
        trials=getattr(args, "trials", 1),
        fixed_meters=getattr(args, "fixed_meters", False),
        independent_draws=getattr(args, "independent_draws", False),
        greedy_mode=getattr(args, "greedy_mode", "protect"),
    )


def _scenario(args, trial=None) -> Scenario:
    if args.scenario:
        return load_scenario(args.scenario)
    if not args.case:
        raise ValidationError("give --scenario or --case")
    topo = load_case(args.case)
    trial = args.trial if trial is None else trial
    return Scenario(topo, randomize_scenario(_config(args), trial, topo), args.seed)


def _dump(args, sc: Scenario) -> None:
    if not args.dump_graph:
        return
    dot = attack_graph(sc.topology, sc.measurements).to_dot()
    if args.dump_graph == "-":
        sys.stderr.write(dot)
    else:
        with open(args.dump_graph, "w") as fh:
            fh.write(dot)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def cmd_attack(args) -> int:
    sc = _scenario(args)
    _dump(args, sc)
    if args.save_scenario:
        save_scenario(sc, args.save_scenario)
    _emit(optimal_attack(sc.topology, sc.measurements).to_dict())
    return 0


def cmd_protect(args) -> int:
    sc = _scenario(args)
    _dump(args, sc)
    plan = greedy_protect(sc.topology, sc.measurements, args.k, full_scan=args.full_scan)
    _emit(plan.to_list())
    return 0


def cmd_pmu(args) -> int:
    sc = _scenario(args)
    _dump(args, sc)
    plan = greedy_pmu(sc.topology, sc.measurements, args.k)
    _emit(plan.to_list())
    return 0


def cmd_verify(args) -> int:
    """Engine vs oracle vs l1 table, plus the residual check of each attack."""
    scenarios = [_scenario(args)] if args.scenario else [_scenario(args, t) for t in range(args.trials)]
    print(f"{'scenario':>8} {'engine':>7} {'oracle':>7} {'l1':>5} {'agree':>6}")
    failed = False
    for k, sc in enumerate(scenarios):
        topo, ms = sc.topology, sc.measurements
        if k == 0:
            _dump(args, sc)
        res = optimal_attack(topo, ms)
        try:
            oracle = brute_force_attack(topo, ms, max_n=args.max_n).optimal_cardinality
        except TooLargeError:
            oracle = "skip"
        l1 = l1_attack(topo, ms, raise_on_infeasible=False).cardinality
        agree = oracle == "skip" or oracle == res.cardinality
        if res.status == OPTIMAL:
            try:
                verify_hidden(topo, ms, res, trials=args.verify_trials, rng=args.seed + k)
            except (VerificationFailure, RankError) as exc:
                print(f"residual check failed on scenario {k}: {exc}", file=sys.stderr)
                agree = False
        failed |= not agree
        fmt = lambda v: "-" if v is None else str(v)  # noqa: E731
        print(f"{k:>8} {fmt(res.cardinality):>7} {fmt(oracle):>7} {fmt(l1):>5} {str(agree):>6}")
    return EXIT_VERIFY if failed else 0


def cmd_experiment(args) -> int:
    if not args.case:
        raise ValidationError("experiment needs --case")
    values = [float(v) for v in args.values.split(",") if v.strip()]
    result = run_sweep(_config(args), args.sweep, values, engine=args.engine, workers=args.workers)
    raw, agg = write_csv(result, args.out)
    print(f"wrote {raw} and {agg}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridcut", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attack", help="minimum-cardinality hidden attack")
    _add_scenario_flags(p)
    p.add_argument("--save-scenario", metavar="PATH", help="write the (randomised) scenario as JSON")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("protect", help="greedy extra measurement protection")
    _add_scenario_flags(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--full-scan", action="store_true", help="try every unprotected meter, not only the cut")
    p.set_defaults(func=cmd_protect)

    p = sub.add_parser("pmu", help="greedy secure PMU placement")
    _add_scenario_flags(p)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_pmu)

    p = sub.add_parser("verify", help="compare min-cut, brute force and l1")
    _add_scenario_flags(p)
    p.add_argument("--max-n", type=int, default=20)
    p.add_argument("--trials", type=int, default=10, help="randomised scenarios when using --case")
    p.add_argument("--verify-trials", type=int, default=100, help="noise trials for the residual check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="parameter sweep to CSV")
    _add_scenario_flags(p)
    p.add_argument("--sweep", choices=SWEEP_PARAMS, required=True)
    p.add_argument("--values", required=True, help="comma-separated sweep values")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--engine", choices=ENGINES, default="mincut")
    p.add_argument("--out", required=True, help="raw CSV path; the aggregate goes next to it as *_agg.csv")
    p.add_argument("--greedy-mode", choices=("protect", "pmu"), default="protect")
    p.add_argument("--independent-draws", action="store_true", help="redraw protections per sweep point")
    p.add_argument("--fixed-meters", action="store_true", help="same angle meters in every trial")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
