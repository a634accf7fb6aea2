"""Run the UGV navigation scenario: the kinect fails at wp2 and the robot detours on lidar."""

from _common import parser, run_and_report

if __name__ == "__main__":
    args = parser(__doc__).parse_args()
    outcome, executor = run_and_report("ugv", args.trace_out)
    print(f"final position {executor.world.robot_at}, battery {executor.world.battery:g}")
    raise SystemExit(0 if outcome.succeeded else 2)
