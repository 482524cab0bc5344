"""The basic control loop against the simulated robot.

The entire user-facing surface is two ideas: append desired actions, read
synchronized histories.  No explicit sleeping or rate control is needed --
``get_observation(t)`` blocks until cycle ``t`` happened, so the loop below
stays synchronized with the back-end automatically.
"""

import numpy as np

from trimanip import (
    Backend,
    BackendConfig,
    Frontend,
    HandAction,
    RobotData,
    SimDriver,
    SimulatedClock,
)

# One clock shared by the data channels and the driver; simulated time keeps
# the run reproducible.
clock = SimulatedClock()
data = RobotData(capacity=10_000, clock=clock)
backend = Backend(SimDriver(clock=clock), data, BackendConfig()).start()
robot = Frontend(data)

# A tiny joint-space PD policy written directly in the loop.
target = np.full(9, 0.4)
kp, kd = 2.0, 0.05

action = HandAction.zero()
t = robot.append_desired_action(action)  # this call marks time zero
for t in range(1000):
    observation = robot.get_observation(t)  # blocks until cycle t completed
    torque = kp * (target - observation.position) - kd * observation.velocity
    robot.append_desired_action(HandAction(torque=torque))
    if t % 200 == 0:
        print(f"cycle {t:4d}: q[0] = {observation.position[0]:+.4f} rad")

# The histories stay queryable afterwards: desired, applied, observed.
desired = robot.get_desired_action(500)
applied = robot.get_applied_action(500)
print("\ncycle 500 desired torque[0]:", f"{desired.torque[0]:+.4f}")
print("cycle 500 applied torque[0]:", f"{applied.torque[0]:+.4f} (after safety chain)")

final = robot.get_observation(999)
print("\nfinal joint positions:", np.round(final.position, 3))
print("target was:           ", target)

backend.stop()
backend.join()
