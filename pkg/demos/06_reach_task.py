"""The fingertip-reaching task with a scripted inverse-kinematics policy.

Each episode samples one target per finger; the observation is (joint
positions, joint velocities, targets), the action is a desired joint
configuration tracked by the driver's PD controller, and the reward is the
negative sum of tip-to-target distances.  A damped-least-squares IK policy
stands in for a learned one and lands within millimeters.
"""

import numpy as np

from trimanip import (
    Backend,
    BackendConfig,
    Frontend,
    HandGeometry,
    ReachEnv,
    RobotData,
    SimDriver,
    SimulatedClock,
    reach_policy,
)

clock = SimulatedClock()
geometry = HandGeometry.symmetric()
data = RobotData(capacity=50_000, clock=clock)
backend = Backend(SimDriver(geometry=geometry, clock=clock), data, BackendConfig()).start()
env = ReachEnv(Frontend(data), geometry, seed=4)

for episode in range(5):
    state = env.reset()
    rewards = []
    done = False
    while not done:
        state, reward, done, info = env.step(reach_policy(geometry, state))
        rewards.append(reward)
    print(
        f"episode {episode}: mean reward {np.mean(rewards):+.4f}, "
        f"final tip errors [mm]: {np.round(1000 * info['tip_errors'], 2)}"
    )

backend.stop()
backend.join()
