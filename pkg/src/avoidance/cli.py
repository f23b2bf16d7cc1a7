"""Command-line surface: plan, build, simulate, verify, scan, ct-check.

Exit codes: 0 success / all checks pass, 1 a check failed or a collision
occurred, 2 bad flags or unreadable input, 3 no plan found by the
implemented methods.  Reports go to stdout as JSON; diagnostics to
stderr.  The default seed comes from AVOIDANCE_SEED when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import AvoidanceError, CollisionError, InfeasibleWithMethod
from .planner import Plan, evaluate, hamming_bound, guaranteed_walkers, \
    max_walkers, plan_for
from .process import TrajectoryLog, run
from .verifier import (check_collisions, check_faithfulness_empirical,
                       check_faithfulness_exact, check_markov,
                       continuous_time_check, entropy_rate, event_stats,
                       exit_code, k3_markov_threshold)

PLAN_CHECKS = ("faithfulness-exact", "markov", "entropy")
LOG_CHECKS = ("collisions", "faithfulness-empirical", "event-stats")


def _default_seed():
    return int(os.environ.get("AVOIDANCE_SEED", "0"))


def _build_parser():
    top = argparse.ArgumentParser(
        prog="avoidance",
        description="Constructions, simulation and verification of "
                    "collision-avoiding couplings of random walkers on "
                    "complete graphs.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="synthesize a coupling plan")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--looped", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("build", help="build a plan and print its summary")
    p.add_argument("--plan", required=True)

    p = sub.add_parser("simulate", help="simulate a plan to a JSONL log")
    p.add_argument("--plan", required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="run verification checks")
    p.add_argument("--plan", default=None)
    p.add_argument("--log", default=None)
    p.add_argument("--checks", required=True,
                   help="comma-separated check names")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--alpha", type=float, default=1e-3)

    p = sub.add_parser("scan", help="threshold and walker-bound scans")
    p.add_argument("--k3-threshold", action="store_true")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-walkers", action="store_true")
    p.add_argument("--n-range", default=None, help="a..b inclusive")
    p.add_argument("--looped", action="store_true")

    p = sub.add_parser("ct-check", help="continuous-time turn-taking check")
    p.add_argument("--plan", required=True)
    p.add_argument("--rounds", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--alpha", type=float, default=1e-3)
    return top


def _load_plan(path):
    try:
        return Plan.load(path)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        raise SystemExit(_fail(f"cannot read plan file {path}: {e}", 2))


def _fail(message, code):
    print(message, file=sys.stderr)
    return code


def _cmd_plan(args):
    if args.n < 2 or args.k < 2:
        return _fail("need --n >= 2 and --k >= 2", 2)
    try:
        plan = plan_for(args.n, args.k, args.looped)
    except InfeasibleWithMethod as e:
        return _fail(str(e), 3)
    text = plan.to_json(indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _cmd_build(args):
    plan = _load_plan(args.plan)
    process = evaluate(plan)
    print(json.dumps({
        "n": process.graph.n,
        "loop_mode": process.graph.loop_label,
        "k": process.k,
        "flags": process.flags,
        "initial_support": len(process.initial()),
        "provenance": plan.provenance,
    }, indent=2))
    return 0


def _cmd_simulate(args):
    plan = _load_plan(args.plan)
    seed = _default_seed() if args.seed is None else args.seed
    process = evaluate(plan)
    try:
        log = run(process, args.rounds, seed)
    except CollisionError as e:
        return _fail(f"collision: {e}", 1)
    try:
        log.write_jsonl(args.out)
    except OSError as e:
        return _fail(f"cannot write {args.out}: {e}", 2)
    return 0


def _cmd_verify(args):
    names = [c.strip() for c in args.checks.split(",") if c.strip()]
    known = set(PLAN_CHECKS) | set(LOG_CHECKS)
    unknown = [c for c in names if c not in known]
    if unknown:
        return _fail(f"unknown checks: {', '.join(unknown)}", 2)
    needs_plan = [c for c in names if c in PLAN_CHECKS]
    needs_log = [c for c in names if c in LOG_CHECKS]
    if needs_plan and not args.plan:
        return _fail(f"checks {needs_plan} need --plan", 2)
    if needs_log and not args.log:
        return _fail(f"checks {needs_log} need --log", 2)
    reports = []
    if needs_plan:
        process = evaluate(_load_plan(args.plan))
        for name in needs_plan:
            if name == "faithfulness-exact":
                reports.append(check_faithfulness_exact(process, args.depth))
            elif name == "markov":
                reports.append(check_markov(process, args.depth))
            elif name == "entropy":
                reports.append(entropy_rate(process))
    if needs_log:
        try:
            log = TrajectoryLog.read_jsonl(args.log)
        except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
            return _fail(f"cannot read log {args.log}: {e}", 2)
        for name in needs_log:
            if name == "collisions":
                reports.append(check_collisions(log))
            elif name == "faithfulness-empirical":
                reports.append(check_faithfulness_empirical(log, args.alpha))
            elif name == "event-stats":
                reports.append(event_stats(log))
    print(json.dumps([r.to_dict() for r in reports], indent=2))
    return exit_code(reports)


def _cmd_scan(args):
    if args.k3_threshold:
        threshold = k3_markov_threshold(args.tol)
        print(f"{threshold:.6f}")
        return 0
    if args.max_walkers:
        if not args.n_range or ".." not in args.n_range:
            return _fail("--max-walkers needs --n-range a..b", 2)
        lo_s, hi_s = args.n_range.split("..", 1)
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError:
            return _fail(f"bad range {args.n_range!r}", 2)
        if lo > hi or lo < 2:
            return _fail(f"empty or invalid range {args.n_range!r}", 2)
        print("n\tk\tbound\tbound_met\thamming_cap")
        for n in range(lo, hi + 1):
            k, _ = max_walkers(n, args.looped)
            bound = guaranteed_walkers(n, args.looped)
            print(f"{n}\t{k}\t{bound}\t{k >= bound}\t{hamming_bound(n)}")
        return 0
    return _fail("scan needs --k3-threshold or --max-walkers", 2)


def _cmd_ct_check(args):
    plan = _load_plan(args.plan)
    seed = _default_seed() if args.seed is None else args.seed
    process = evaluate(plan)
    report = continuous_time_check(process, args.rounds, seed,
                                   alpha=args.alpha)
    print(json.dumps([report.to_dict()], indent=2))
    return exit_code([report])


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "plan": _cmd_plan,
        "build": _cmd_build,
        "simulate": _cmd_simulate,
        "verify": _cmd_verify,
        "scan": _cmd_scan,
        "ct-check": _cmd_ct_check,
    }
    try:
        return handlers[args.command](args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    except CollisionError as e:
        return _fail(f"collision: {e}", 1)
    except AvoidanceError as e:
        return _fail(str(e), 2)
    except (ValueError, OSError) as e:
        return _fail(str(e), 2)


if __name__ == "__main__":
    raise SystemExit(main())
