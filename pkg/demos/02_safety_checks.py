"""What the safety layer does to hostile commands.

Every command passes through a fixed chain before reaching the motors:
PD fold-in, velocity damping above the speed limit, pull-back PD beyond the
joint limits, and finally a hard torque clip.  The demo also provokes the
two timing safeguards: the back-end watchdog (too many missed deadlines in
real-time mode) and the driver-side command timeout.
"""

import time

import numpy as np

from trimanip import (
    Backend,
    BackendConfig,
    Frontend,
    HandAction,
    HandObservation,
    LateActionPolicy,
    Mode,
    RobotData,
    SafetyConfig,
    SimDriver,
    SimulatedClock,
    Status,
    safety_chain,
)

cfg = SafetyConfig()
rest = HandObservation.zero()

print("== torque clipping ==")
greedy = HandAction(torque=np.full(9, 5.0))  # way beyond max_torque
applied = safety_chain(greedy, rest, cfg)
print(f"requested 5.0 N*m per joint, applied {applied.torque[0]:.2f} N*m")

print("\n== velocity damping above the speed limit ==")
speeding = HandObservation(
    position=np.zeros(9), velocity=np.full(9, 15.0), torque=np.zeros(9)
)
applied = safety_chain(HandAction.zero(), speeding, cfg)
print(f"joints at 15 rad/s, zero request -> braking torque {applied.torque[0]:+.2f} N*m")

print("\n== position-limit pull-back ==")
beyond = HandObservation(
    position=np.full(9, cfg.position_upper[0] + 0.3),
    velocity=np.zeros(9),
    torque=np.zeros(9),
)
pushing = HandAction(torque=np.full(9, 0.36))  # trying to push further out
applied = safety_chain(pushing, beyond, cfg)
print(f"joint 0.3 rad past its limit, push request replaced by {applied.torque[0]:+.2f} N*m")

print("\n== back-end watchdog (real-time mode, shutdown policy) ==")
clock = SimulatedClock(patience=0.002)  # wait 2 ms of real time per deadline
config = BackendConfig(
    mode=Mode.REAL_TIME,
    delta=0.001,
    max_missed_actions=10,
    late_action_policy=LateActionPolicy.SHUTDOWN,
)
data = RobotData(clock=clock)
backend = Backend(SimDriver(clock=clock), data, config).start()
robot = Frontend(data)
robot.append_desired_action(HandAction.zero())
# ... and never append again: the back-end gives up after the threshold
backend.join(timeout=10.0)
record = data.status.get(data.status.newest_index())
print(f"status: {record.state.value} -- {record.message}")

print("\n== same stall under the repeat policy ==")
clock = SimulatedClock(patience=0.002)
config = BackendConfig(
    mode=Mode.REAL_TIME, delta=0.001, late_action_policy=LateActionPolicy.REPEAT_PREVIOUS
)
data = RobotData(clock=clock)
backend = Backend(SimDriver(clock=clock), data, config).start()
robot = Frontend(data)
robot.append_desired_action(HandAction(torque=np.full(9, 0.05)))
while len(data.observations) < 5:
    time.sleep(0.001)
backend.stop()
backend.join()
repeated = sum(
    1
    for t in range(len(data.status))
    if data.status.get(t).state is Status.ACTION_REPEATED
)
print(f"back-end kept the robot alive by repeating the action {repeated} times")
