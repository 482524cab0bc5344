"""Mapping the real-time interface onto standard step/reset environments.

An action commanded now cannot depend on the observation it coincides with,
so the raw interface is one step out of phase with a textbook MDP.  Three
wrappers bridge the gap:

* AugmentedEnv      -- state (y_t, a_t): exact, doubles the state content.
* ReducedRateEnv    -- same, with each action applied k times; observation
                       from the first of the k cycles, leaving a full
                       control period to compute the next action.
* ApproxEnv         -- k repeats, observation from the last cycle, plain
                       observation as state; exact enough when the policy
                       computes much faster than the control rate.
"""

import numpy as np

from trimanip import (
    ApproxEnv,
    AugmentedEnv,
    Backend,
    BackendConfig,
    Frontend,
    HandAction,
    ReducedRateEnv,
    RobotData,
    SimDriver,
    SimulatedClock,
)


def fresh_robot():
    clock = SimulatedClock()
    data = RobotData(capacity=20_000, clock=clock)
    backend = Backend(SimDriver(clock=clock), data, BackendConfig()).start()
    return Frontend(data), backend, data


action = HandAction(torque=np.full(9, 0.02))

frontend, backend, data = fresh_robot()
env = AugmentedEnv(frontend)
state, reward, done, info = env.step(action)
print("AugmentedEnv: state = (observation, the action just sent)")
print(f"  cycle index {info['t']}, state.action is the input: {state.action is action}")
backend.stop(), backend.join()

frontend, backend, data = fresh_robot()
env = ReducedRateEnv(frontend, rate_divisor=10)
for n in range(3):
    state, _, _, info = env.step(action)
    print(
        f"ReducedRateEnv step {n}: observation index {info['t']}, "
        f"desired-action series length {len(data.desired_actions)}"
    )
backend.stop(), backend.join()

frontend, backend, data = fresh_robot()
env = ApproxEnv(frontend, rate_divisor=10)
state, _, _, info = env.step(action)
print(
    f"ApproxEnv: observation index {info['t']} (last of the k), "
    f"state is the raw {state.position.size + state.velocity.size + state.torque.size}-value observation"
)
backend.stop(), backend.join()
