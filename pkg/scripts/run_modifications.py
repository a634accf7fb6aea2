"""Run the UGV baseline and the three single-file modifications side by side."""

from _common import run_and_report

SCENARIOS = {
    "ugv": "baseline",
    "ugv_mod1": "problem file: start at wp4",
    "ugv_mod2": "domain file: obstacle corridor costs more",
    "ugv_mod3": "KB file: MRPT meets the obstacle safety level",
}

if __name__ == "__main__":
    failed = 0
    for name, change in SCENARIOS.items():
        print(f"### {change}")
        outcome, _ = run_and_report(name)
        failed += not outcome.succeeded
        print()
    raise SystemExit(2 if failed else 0)
