"""Command line front end: run scenarios, plan, validate and diff plans."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .engine import LoopConfig, Phase
from .kb import KBError
from .pddl import ParseError, ground, parse_domain, parse_problem, require_linking_pattern
from .planner import (
    DEFAULT_NODE_LIMIT,
    DEFAULT_TIME_LIMIT,
    PlanFormatError,
    SearchLimitExceeded,
    Unsolvable,
    diff_plans,
    dumps_plan,
    loads_plan,
    plan,
    render_plan,
    validate_plan,
)
from .sim import ScenarioError, load_scenario, run_scenario, scenario_path

EXIT_OK = 0
EXIT_NEGATIVE = 1  # unsolvable, invalid or different
EXIT_FAILED = 2
EXIT_CONFIG = 3


@dataclass
class RunConfig:
    scenario_path: Path
    trace_out_path: Path | None = None
    planner_mode: str = "optimal"
    node_limit: int = DEFAULT_NODE_LIMIT
    time_limit: float = DEFAULT_TIME_LIMIT
    verbosity: int = 1
    plans_out: Path | None = None

    def __post_init__(self) -> None:
        if self.node_limit <= 0 or self.time_limit <= 0:
            raise ValueError("limits must be positive")
        if self.planner_mode not in ("optimal", "greedy"):
            raise ValueError(f"unknown planner mode {self.planner_mode!r}")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _resolve_scenario(arg: str) -> Path:
    p = Path(arg)
    if p.is_dir():
        p = p / "scenario.json"
    if p.exists():
        return p
    try:
        return scenario_path(arg)
    except ScenarioError:
        return p  # let the loader report it


def cmd_run(config: RunConfig) -> int:
    try:
        scenario = load_scenario(config.scenario_path)
        loop = LoopConfig(config.planner_mode, config.node_limit, config.time_limit)
        outcome, _ = run_scenario(scenario, loop)
    except (ScenarioError, ParseError, KBError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except ValueError as exc:
        # linking violations and bad world definitions
        _err(f"{config.scenario_path}: {exc}")
        return EXIT_CONFIG

    if config.trace_out_path is not None:
        outcome.trace.write(config.trace_out_path)
    if config.plans_out is not None:
        config.plans_out.mkdir(parents=True, exist_ok=True)
        for i, p in enumerate(outcome.plans, 1):
            (config.plans_out / f"plan_{i}.json").write_text(dumps_plan(p), encoding="utf-8")
    if config.verbosity > 0:
        for i, p in enumerate(outcome.plans, 1):
            print(f"plan {i}:")
            print(render_plan(p), end="")
        print(f"replans: {outcome.replan_count}")
        print(f"outcome: {outcome.status.value} ({outcome.reason})")
    return EXIT_OK if outcome.status is Phase.SUCCEEDED else EXIT_FAILED


def _load_task(domain_path: str, problem_path: str):
    domain = parse_domain(_read(domain_path), domain_path)
    problem = parse_problem(_read(problem_path), domain, problem_path)
    return domain, problem


def cmd_plan(domain_path: str, problem_path: str, mode: str = "optimal", node_limit: int = DEFAULT_NODE_LIMIT,
             time_limit: float = DEFAULT_TIME_LIMIT, fmt: str = "json") -> int:
    try:
        domain, problem = _load_task(domain_path, problem_path)
    except OSError as exc:
        _err(f"{exc.filename}: error: {exc.strerror}")
        return EXIT_CONFIG
    except ParseError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    diagnostics = require_linking_pattern(domain, problem)
    for d in diagnostics:
        _err(str(d))
    if diagnostics:
        return EXIT_CONFIG
    try:
        result = plan(ground(domain, problem), mode, node_limit, time_limit)
    except SearchLimitExceeded as exc:
        _err(f"search stopped: {exc}")
        return EXIT_NEGATIVE
    if isinstance(result, Unsolvable):
        print("unsolvable")
        if result.unreachable_goals:
            print("goals unreachable even ignoring deletes and numeric conditions:")
            for g in sorted(result.unreachable_goals):
                print(f"  {g}")
        else:
            print(f"search space exhausted after {result.expanded} expansions")
        return EXIT_NEGATIVE
    print(dumps_plan(result) if fmt == "json" else render_plan(result), end="")
    return EXIT_OK


def cmd_validate(domain_path: str, problem_path: str, plan_path: str) -> int:
    try:
        domain, problem = _load_task(domain_path, problem_path)
        candidate = loads_plan(_read(plan_path))
    except OSError as exc:
        _err(f"{exc.filename}: error: {exc.strerror}")
        return EXIT_CONFIG
    except (ParseError, PlanFormatError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    verdict = validate_plan(domain, problem, candidate)
    if verdict:
        print(f"valid, total cost {verdict.total_cost:g}")
        return EXIT_OK
    where = "at the end" if verdict.step == len(candidate.steps) else f"at step {verdict.step}"
    print(f"invalid {where}: {verdict.reason}")
    return EXIT_NEGATIVE


def cmd_diff(plan_a_path: str, plan_b_path: str) -> int:
    plans = []
    for path in (plan_a_path, plan_b_path):
        try:
            plans.append(loads_plan(_read(path)))
        except OSError as exc:
            _err(f"{exc.filename}: error: {exc.strerror}")
            return EXIT_CONFIG
        except PlanFormatError as exc:
            _err(f"{path}: {exc}")
            return EXIT_CONFIG
    lines = diff_plans(*plans)
    for line in lines:
        print(line)
    return EXIT_NEGATIVE if lines else EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _planner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=["optimal", "greedy"], default="optimal")
    p.add_argument("--node-limit", type=_positive_int, default=DEFAULT_NODE_LIMIT)
    p.add_argument("--time-limit", type=_positive_float, default=DEFAULT_TIME_LIMIT, help="seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coadapt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario end to end")
    run.add_argument("--scenario", required=True,
                     help="scenario JSON file, its directory, or a packaged scenario name (ugv, uuv, ...)")
    run.add_argument("--trace-out", type=Path)
    run.add_argument("--plans-out", type=Path, help="directory for plan_<n>.json files")
    run.add_argument("--quiet", action="store_true")
    _planner_flags(run)

    pl = sub.add_parser("plan", help="plan once for a domain and problem")
    pl.add_argument("domain")
    pl.add_argument("problem")
    pl.add_argument("--format", choices=["json", "text"], default="json")
    _planner_flags(pl)

    val = sub.add_parser("validate", help="check a plan file against a domain and problem")
    val.add_argument("domain")
    val.add_argument("problem")
    val.add_argument("plan")

    diff = sub.add_parser("diff", help="step-aligned comparison of two plan files")
    diff.add_argument("plan_a")
    diff.add_argument("plan_b")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which would read as a failed mission
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "run":
        config = RunConfig(_resolve_scenario(args.scenario), args.trace_out, args.mode, args.node_limit,
                           args.time_limit, 0 if args.quiet else 1, args.plans_out)
        return cmd_run(config)
    if args.command == "plan":
        return cmd_plan(args.domain, args.problem, args.mode, args.node_limit, args.time_limit, args.format)
    if args.command == "validate":
        return cmd_validate(args.domain, args.problem, args.plan)
    return cmd_diff(args.plan_a, args.plan_b)


if __name__ == "__main__":
    sys.exit(main())
