"""Step/reset environment wrappers over a robot front-end.

Because a real-time controller cannot act on the observation it coincides
with in time, the raw interface does not match the standard MDP dependence
structure.  Three mappings restore it:

* :class:`AugmentedEnv` -- define the state as ``s_{t+1} = (y_t, a_t)``.
* :class:`ReducedRateEnv` -- same augmentation but each action is applied
  ``k`` times; the step observation is taken at the *first* of the ``k``
  indices, leaving the full control cycle for computing the next action.
* :class:`ApproxEnv` -- apply the action ``k`` times and return the raw
  observation at the *last* index; ignores one dependence arrow, so the
  state keeps the plain observation dimensionality but the controller has
  only one robot cycle to respond.

:class:`ReachEnv` is a concrete task on top: each fingertip must reach a
randomly sampled target, reward is the negative sum of tip-to-target
distances, actions are desired joint configurations tracked by the driver's
PD controller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hand import JOINTS_PER_FINGER, NUM_FINGERS, NUM_JOINTS, HandAction
from .kinematics import HandGeometry, inverse_kinematics
from .robot import Frontend


@dataclass(frozen=True)
class AugmentedState:
    """MDP state s_{t+1} = (y_t, a_t)."""

    observation: object
    action: object


class AugmentedEnv:
    def __init__(self, frontend: Frontend):
        self.frontend = frontend

    def step(self, action):
        t = self.frontend.append_desired_action(action)
        observation = self.frontend.get_observation(t)
        state = AugmentedState(observation=observation, action=action)
        return state, 0.0, False, {"t": t}


class ReducedRateEnv:
    def __init__(self, frontend: Frontend, rate_divisor: int):
        if rate_divisor < 1:
            raise ValueError("rate_divisor must be >= 1")
        self.frontend = frontend
        self.rate_divisor = int(rate_divisor)

    def step(self, action):
        t = self.frontend.append_desired_action(action)
        for _ in range(self.rate_divisor - 1):
            self.frontend.append_desired_action(action)
        observation = self.frontend.get_observation(t)
        state = AugmentedState(observation=observation, action=action)
        return state, 0.0, False, {"t": t}


class ApproxEnv:
    def __init__(self, frontend: Frontend, rate_divisor: int):
        if rate_divisor < 1:
            raise ValueError("rate_divisor must be >= 1")
        self.frontend = frontend
        self.rate_divisor = int(rate_divisor)

    def step(self, action):
        t = -1
        for _ in range(self.rate_divisor):
            t = self.frontend.append_desired_action(action)
        state = self.frontend.get_observation(t)
        return state, 0.0, False, {"t": t}


@dataclass(frozen=True)
class ReachTaskSpec:
    episode_length: float = 2.0  # s
    rate_divisor: int = 10  # environment steps at 100 Hz over a 1 kHz robot
    control_period: float = 0.001  # s, the robot cycle
    # per-finger sampling box, in the finger base frame: centered this far
    # below the mount, half this wide on each axis; inscribed in the
    # reachable sphere for the default geometry
    target_drop: float = 0.176  # m below the mount
    target_half_extent: float = 0.10  # m

    def __post_init__(self):
        if self.episode_length <= 0 or self.control_period <= 0:
            raise ValueError("episode_length and control_period must be positive")
        if self.rate_divisor < 1:
            raise ValueError("rate_divisor must be >= 1")

    @property
    def steps_per_episode(self) -> int:
        return int(round(self.episode_length / (self.rate_divisor * self.control_period)))


class ReachEnv:
    """Per-finger reaching task with PD-tracked joint-position actions.

    Observation: joint positions, joint velocities and the three task-space
    targets, concatenated to a 27-vector.  Action: desired joint
    configuration (9-vector).  Reward: negative sum of tip-to-target
    distances.  Episodes are fixed length with no success bonus; the final
    per-finger errors are reported through ``info``.
    """

    def __init__(
        self,
        frontend: Frontend,
        geometry: HandGeometry,
        spec: ReachTaskSpec | None = None,
        seed: int = 0,
    ):
        self.frontend = frontend
        self.geometry = geometry
        self.spec = spec if spec is not None else ReachTaskSpec()
        self._rng = np.random.default_rng(seed)
        self._targets = np.zeros((NUM_FINGERS, 3))
        self._steps = 0
        self._last_observation = None

    @property
    def targets(self) -> np.ndarray:
        return self._targets.copy()

    def _sample_targets(self) -> np.ndarray:
        spec = self.spec
        targets = np.zeros((NUM_FINGERS, 3))
        for i, finger in enumerate(self.geometry.fingers):
            local = self._rng.uniform(
                -spec.target_half_extent, spec.target_half_extent, size=3
            )
            local[2] -= spec.target_drop
            targets[i] = finger.base_rotation @ local + finger.base_translation
        return targets

    def _state(self, observation) -> np.ndarray:
        return np.concatenate(
            [observation.position, observation.velocity, self._targets.ravel()]
        )

    def reset(self, targets=None) -> np.ndarray:
        """Sample new targets and return the current state.

        Only the very first reset consumes a robot cycle (to obtain an
        observation); afterwards the latest observation is reused so that an
        episode costs exactly ``episode_length / control_period`` cycles.
        ``targets`` overrides the sampler (useful for scripted checks).
        """
        if targets is None:
            self._targets = self._sample_targets()
        else:
            self._targets = np.asarray(targets, dtype=float).reshape(NUM_FINGERS, 3)
        self._steps = 0
        if self._last_observation is None:
            newest = self.frontend.latest_time_index()
            if newest is None:
                newest = self.frontend.append_desired_action(HandAction.zero())
            self._last_observation = self.frontend.get_observation(newest)
        return self._state(self._last_observation)

    def step(self, desired_joint_positions):
        action = HandAction.hold_position(desired_joint_positions)
        t = -1
        for _ in range(self.spec.rate_divisor):
            t = self.frontend.append_desired_action(action)
        observation = self.frontend.get_observation(t)
        self._last_observation = observation
        self._steps += 1

        tips = self.geometry.tip_positions(observation.position)
        errors = np.linalg.norm(tips - self._targets, axis=1)
        reward = -float(errors.sum())
        done = self._steps >= self.spec.steps_per_episode
        info = {"t": t, "tip_errors": errors}
        return self._state(observation), reward, done, info


def _wrap_angles(q: np.ndarray) -> np.ndarray:
    # every joint of the chain is 2*pi-periodic, so the wrapped target
    # commands the same tip while letting the PD take the short way
    return (q + np.pi) % (2.0 * np.pi) - np.pi


def reach_policy(
    geometry: HandGeometry, state: np.ndarray, joint_bound: float = 2.6
) -> np.ndarray:
    """Scripted reaching policy: per-finger damped-least-squares IK.

    Maps the reach-task state straight to a desired joint configuration;
    a deterministic stand-in for a learned policy.  Among the IK solutions
    from a couple of starting branches it picks one that stays inside
    ``joint_bound`` (so the safety position limits never fight the PD) and
    is closest to the current configuration.
    """
    q = state[:NUM_JOINTS]
    targets = state[2 * NUM_JOINTS :].reshape(NUM_FINGERS, 3)
    desired = np.zeros(NUM_JOINTS)
    elbow_down = np.array([0.0, 0.6, -1.2])
    for i, finger in enumerate(geometry.fingers):
        sl = slice(i * JOINTS_PER_FINGER, (i + 1) * JOINTS_PER_FINGER)
        best = None
        best_distance = np.inf
        fallback = q[sl]
        for guess_index, guess in enumerate((q[sl], elbow_down, -elbow_down)):
            result = inverse_kinematics(finger, targets[i], guess)
            candidate = _wrap_angles(result.q)
            if not result.reached:
                fallback = candidate
                continue
            if np.abs(candidate).max() > joint_bound:
                fallback = np.clip(candidate, -joint_bound, joint_bound)
                continue
            distance = float(np.abs(candidate - q[sl]).max())
            if distance < best_distance:
                best = candidate
                best_distance = distance
            if guess_index == 0:
                break  # the local branch is admissible: take it
        desired[sl] = best if best is not None else fallback
    return desired
