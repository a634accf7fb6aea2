"""Shared helpers for the example scripts."""

import argparse
from pathlib import Path

from coadapt.planner import diff_plans, render_plan
from coadapt.sim import load_scenario, run_scenario, scenario_path


def run_and_report(name: str, trace_out: Path | None = None):
    outcome, executor = run_scenario(load_scenario(scenario_path(name)))
    print(f"== {name}: {outcome.status.value} after {outcome.replan_count} replan(s)")
    for i, p in enumerate(outcome.plans, 1):
        request = outcome.trace.of_kind("plan_request")[i - 1].payload
        print(f"-- plan {i} (reasons: {', '.join(request['reasons']) or 'initial'})")
        print(render_plan(p), end="")
    for prev, cur in zip(outcome.plans, outcome.plans[1:]):
        print("-- diff")
        for line in diff_plans(prev, cur):
            print(f"  {line}")
    if trace_out is not None:
        outcome.trace.write(trace_out)
        print(f"trace written to {trace_out}")
    return outcome, executor


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--trace-out", type=Path)
    return p
