"""Run the UUV pipeline scenario: a battery drop mid-search forces a recharge and slower motion."""

from _common import parser, run_and_report

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--visibility", action="store_true", help="run the variant with changing water visibility")
    args = p.parse_args()
    outcome, executor = run_and_report("uuv_visibility" if args.visibility else "uuv", args.trace_out)
    print(f"final battery {executor.world.battery:g}, pipeline {executor.world.phase.value}")
    raise SystemExit(0 if outcome.succeeded else 2)
