"""Simulated robot driver: safety chain plus per-joint dynamics at 1 ms.

The driver owns the joint state and implements the two-method contract the
back-end expects:

* ``get_latest_observation()`` returns a snapshot of the joint state,
* ``apply_action(action)`` runs the safety chain, integrates one control
  period of dynamics and returns the action actually applied.

Each joint is an independent inertia with viscous damping; optionally a
gravity load from point masses at the link midpoints is added.  There is no
contact model here -- object interaction is handled by the rigid-object
simulator, which receives the optimizer's contact forces directly.

Everything is deterministic: the same action sequence from the same initial
state reproduces bit-identical trajectories.
"""

from __future__ import annotations

import numpy as np

from .clocks import MonotonicClock
from .hand import (
    DEFAULT_POSITION_KD,
    DEFAULT_POSITION_KP,
    NUM_FINGERS,
    NUM_JOINTS,
    HandAction,
    HandObservation,
)
from .kinematics import HandGeometry, gravity_torque
from .safety import SafetyConfig, safety_chain, watchdog_expired


class SimParams:
    def __init__(
        self,
        joint_inertia: float = 0.004,  # kg*m^2
        joint_viscous_damping: float = 0.01,  # N*m*s/rad
        gravity_enabled: bool = False,
        delta: float = 0.001,  # s
        link_masses: tuple[float, float] = (0.2, 0.2),  # kg
    ):
        if joint_inertia <= 0:
            raise ValueError("joint_inertia must be positive")
        if delta <= 0:
            raise ValueError("delta must be positive")
        self.joint_inertia = float(joint_inertia)
        self.joint_viscous_damping = float(joint_viscous_damping)
        self.gravity_enabled = bool(gravity_enabled)
        self.delta = float(delta)
        self.link_masses = (float(link_masses[0]), float(link_masses[1]))


class SimDriver:
    """Deterministic stand-in for the real motor-board driver.

    Owned by exactly one back-end; not safe to share between threads.
    """

    def __init__(
        self,
        geometry: HandGeometry | None = None,
        params: SimParams | None = None,
        safety: SafetyConfig | None = None,
        clock=None,
        initial_position=None,
        position_kp: float = DEFAULT_POSITION_KP,
        position_kd: float = DEFAULT_POSITION_KD,
    ):
        self.geometry = geometry if geometry is not None else HandGeometry.symmetric()
        self.params = params if params is not None else SimParams()
        self.safety = safety if safety is not None else SafetyConfig()
        self._clock = clock if clock is not None else MonotonicClock()
        self.position_kp = float(position_kp)
        self.position_kd = float(position_kd)

        if initial_position is None:
            self._q = np.zeros(NUM_JOINTS)
        else:
            self._q = np.asarray(initial_position, dtype=float).copy()
            if self._q.shape != (NUM_JOINTS,):
                raise ValueError(f"initial_position must have shape ({NUM_JOINTS},)")
        self._qdot = np.zeros(NUM_JOINTS)
        self._last_torque = np.zeros(NUM_JOINTS)
        self._last_command_time: float | None = None
        self._motors_shut_down = False
        self._error: str | None = None

    # -- driver contract ----------------------------------------------------
    def get_latest_observation(self) -> HandObservation:
        return HandObservation._trusted(
            self._q.copy(), self._qdot.copy(), self._last_torque.copy()
        )

    def apply_action(self, action: HandAction) -> HandAction:
        now = self._clock.now()
        if not self._motors_shut_down and watchdog_expired(
            self._last_command_time, now, self.safety
        ):
            # Motor-board style timeout: torque off permanently, report it.
            self._motors_shut_down = True
            gap = now - self._last_command_time
            self._error = (
                f"driver watchdog: no command for {gap:.4f} s "
                f"(timeout {self.safety.driver_timeout} s), motors shut down"
            )
        self._last_command_time = now

        if self._motors_shut_down:
            applied = HandAction.zero()
        else:
            applied = safety_chain(
                action,
                self.get_latest_observation(),
                self.safety,
                default_kp=self.position_kp,
                default_kd=self.position_kd,
            )
        self._integrate(applied.torque)
        return applied

    def get_error(self) -> str | None:
        return self._error

    # -- internals ------------------------------------------------------------
    def _integrate(self, torque: np.ndarray) -> None:
        params = self.params
        net = torque - params.joint_viscous_damping * self._qdot
        if params.gravity_enabled:
            net = net - self._gravity_load()
        # semi-implicit Euler: velocity first, then position with the new velocity
        self._qdot = self._qdot + params.delta * net / params.joint_inertia
        self._q = self._q + params.delta * self._qdot
        self._last_torque = np.asarray(torque, dtype=float).copy()

    def _gravity_load(self) -> np.ndarray:
        load = np.empty(NUM_JOINTS)
        for i in range(NUM_FINGERS):
            sl = slice(3 * i, 3 * i + 3)
            load[sl] = gravity_torque(
                self.geometry.fingers[i], self._q[sl], self.params.link_masses
            )
        return load

    @property
    def joint_state(self):
        """(q, qdot) copies, for test inspection."""
        return self._q.copy(), self._qdot.copy()
