"""The two desk-scale manipulation tasks, end to end.

Per control cycle: object-pose PD -> center-of-mass wrench -> force
optimization over the contacts -> fingertip impedance -> joint torques.
The cube follows the optimizer's contact forces (fingertips are assumed
attached, with slip excluded by the cone constraints) while the simulated
fingers track their contact points.

Writes the same CSV artifacts as the ``trimanip lift`` / ``trimanip circle``
commands into ``demo_out/``.
"""

from trimanip.config import RunConfig
from trimanip.experiments import run_tracking_task

config = RunConfig.from_mapping(
    {
        "lift": {"height": 0.2, "duration": 2.0, "settle": 0.3},
        "circle": {"radius": 0.04, "period": 3.0},
    }
)

for task in ("lift", "circle"):
    result = run_tracking_task(config, task, out_dir="demo_out")
    print(f"== {task} ==")
    print(f"  cycles:                {result.times.size}")
    print(f"  final position error:  {result.final_position_error:.2e} m")
    if task == "circle":
        print(f"  rms planar error:      {result.rms_planar_error:.2e} m")
    print(f"  wrench identity max:   {result.equality_residuals.max():.2e}")
    print(f"  infeasible fallbacks:  {result.fallback_cycles}")
    print(f"  wrote demo_out/{task}_trajectory.csv and {task}_robot_log.csv")
