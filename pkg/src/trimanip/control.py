"""Object-tracking control pipeline at the control rate.

Per cycle: a PD law on the object pose produces the center-of-mass wrench,
the grasp QP distributes it over the contacts, and a fingertip impedance
law maps each contact force to joint torques through the Jacobian
transpose:

    wrench PD  ->  force optimization  ->  tau = J' (F_tip + P dx + D dxd)

Also provides the reference trajectories for the desk-scale tasks: a
minimum-jerk vertical lift and a constant-speed circle in the table plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grasp import ContactSet, ForceDistributor, QPSolution, QPStatus, unpack_forces
from .hand import NUM_FINGERS, NUM_JOINTS, HandAction, HandObservation
from .kinematics import HandGeometry, forward_kinematics, jacobian
from .rotations import (
    identity_quat,
    quat_normalize,
    quat_to_matrix,
    rotation_error_vector,
)


def _vec3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).copy()
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ObjectState:
    """Pose and twist of the manipulated object, plus its mass."""

    position: np.ndarray
    velocity: np.ndarray
    orientation: np.ndarray  # unit quaternion, scalar first
    angular_velocity: np.ndarray
    mass: float

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        object.__setattr__(self, "velocity", _vec3(self.velocity, "velocity"))
        object.__setattr__(
            self, "angular_velocity", _vec3(self.angular_velocity, "angular_velocity")
        )
        quat = np.asarray(self.orientation, dtype=float).copy()
        if quat.shape != (4,):
            raise ValueError("orientation must be a quaternion [w, x, y, z]")
        if abs(np.linalg.norm(quat) - 1.0) > 1e-9:
            raise ValueError("orientation quaternion must be unit length")
        quat.setflags(write=False)
        object.__setattr__(self, "orientation", quat)
        if self.mass <= 0:
            raise ValueError("mass must be positive")


@dataclass(frozen=True)
class TrajectorySample:
    position: np.ndarray
    velocity: np.ndarray
    orientation: np.ndarray
    angular_velocity: np.ndarray


@dataclass(frozen=True)
class WrenchGains:
    """Gains of the object-pose PD law; hand-tuned configuration."""

    p_lin: float = 200.0  # N/m
    d_lin: float = 20.0  # N*s/m
    p_ang: float = 1.0  # N*m/rad
    d_ang: float = 0.1  # N*m*s/rad
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))

    def __post_init__(self):
        object.__setattr__(self, "gravity", _vec3(self.gravity, "gravity"))
        if min(self.p_lin, self.d_lin, self.p_ang, self.d_ang) < 0:
            raise ValueError("gains must be non-negative")


@dataclass(frozen=True)
class TipGains:
    """Fingertip impedance gains."""

    p_tip: float = 50.0  # N/m
    d_tip: float = 1.0  # N*s/m

    def __post_init__(self):
        if min(self.p_tip, self.d_tip) < 0:
            raise ValueError("gains must be non-negative")


def lift_trajectory(start_position, height: float, duration: float, orientation=None):
    """Minimum-jerk vertical lift; holds the end pose after ``duration``."""
    if height <= 0 or duration <= 0:
        raise ValueError("height and duration must be positive")
    start = np.asarray(start_position, dtype=float)
    quat = identity_quat() if orientation is None else quat_normalize(orientation)
    zero3 = np.zeros(3)

    def sample(t: float) -> TrajectorySample:
        u = min(max(t / duration, 0.0), 1.0)
        s = u**3 * (10.0 - 15.0 * u + 6.0 * u**2)
        sdot = 30.0 * u**2 * (1.0 - 2.0 * u + u**2) / duration  # 0 at both ends
        position = start + np.array([0.0, 0.0, height * s])
        velocity = np.array([0.0, 0.0, height * sdot])
        return TrajectorySample(position, velocity, quat, zero3)

    return sample


def circle_trajectory(start_position, radius: float, period: float, orientation=None):
    """Constant-speed circle in the table plane, starting at the start pose.

    The circle's center sits ``radius`` behind the start along -x, so the
    reference begins exactly at ``start_position``.
    """
    if radius < 0 or period <= 0:
        raise ValueError("radius must be non-negative and period positive")
    start = np.asarray(start_position, dtype=float)
    center = start - np.array([radius, 0.0, 0.0])
    quat = identity_quat() if orientation is None else quat_normalize(orientation)
    zero3 = np.zeros(3)
    rate = 2.0 * np.pi / period

    def sample(t: float) -> TrajectorySample:
        angle = rate * t
        position = center + radius * np.array([np.cos(angle), np.sin(angle), 0.0])
        velocity = radius * rate * np.array([-np.sin(angle), np.cos(angle), 0.0])
        return TrajectorySample(position, velocity, quat, zero3)

    return sample


def com_wrench(state: ObjectState, desired: TrajectorySample, gains: WrenchGains):
    """World-frame force and moment to keep the object on its reference.

    F = P dx + D dxd - m g,  M = P dq + D dw, with dq the small-angle
    rotation error vector (desired minus actual throughout).
    """
    dx = desired.position - state.position
    dxd = desired.velocity - state.velocity
    force = gains.p_lin * dx + gains.d_lin * dxd - state.mass * gains.gravity
    dq = rotation_error_vector(desired.orientation, state.orientation)
    dw = desired.angular_velocity - state.angular_velocity
    moment = gains.p_ang * dq + gains.d_ang * dw
    return force, moment


def impedance_torques(
    geom,
    q,
    qdot,
    tip_force,
    desired_position,
    desired_velocity,
    gains: TipGains,
) -> np.ndarray:
    """Joint torques tau = J' (F_tip + P dx_tip + D dxd_tip) for one finger."""
    jac = jacobian(geom, q)
    dx = np.asarray(desired_position, dtype=float) - forward_kinematics(geom, q)
    dxd = np.asarray(desired_velocity, dtype=float) - jac @ np.asarray(qdot, dtype=float)
    total_force = np.asarray(tip_force, dtype=float) + gains.p_tip * dx + gains.d_tip * dxd
    return jac.T @ total_force


@dataclass(frozen=True)
class ControlStepInfo:
    wrench_world: np.ndarray  # (6,)
    wrench_object: np.ndarray  # (6,)
    forces_object: np.ndarray  # (k, 3)
    forces_world: np.ndarray  # (k, 3)
    tip_targets: np.ndarray  # (k, 3), world frame
    qp: QPSolution | None
    fallback: str  # "", "held", or "zero"


class GraspController:
    """Stateful per-cycle controller for a fixed grasp.

    Holds the warm-started force distributor and the infeasibility
    fallback: an infeasible cycle reuses the last feasible forces for up to
    ``stale_limit`` cycles, after which the forces drop to zero.
    """

    def __init__(
        self,
        geometry: HandGeometry,
        contacts: ContactSet,
        trajectory,
        wrench_gains: WrenchGains | None = None,
        tip_gains: TipGains | None = None,
        stale_limit: int = 50,
    ):
        if len(contacts) != NUM_FINGERS:
            raise ValueError(f"need exactly {NUM_FINGERS} contacts, one per finger")
        self.geometry = geometry
        self.contacts = contacts
        self.trajectory = trajectory
        self.wrench_gains = wrench_gains if wrench_gains is not None else WrenchGains()
        self.tip_gains = tip_gains if tip_gains is not None else TipGains()
        self.stale_limit = int(stale_limit)
        self._distributor = ForceDistributor(contacts)
        self._held_forces: np.ndarray | None = None
        self._stale = 0

    def control_step(
        self, t: float, object_state: ObjectState, joint_obs: HandObservation
    ) -> tuple[HandAction, ControlStepInfo]:
        desired = self.trajectory(t)
        force_w, moment_w = com_wrench(object_state, desired, self.wrench_gains)

        # the QP works in the object's local frame
        rot = quat_to_matrix(object_state.orientation)
        force_o = rot.T @ force_w
        moment_o = rot.T @ moment_w

        solution = self._distributor.solve(force_o, moment_o)
        fallback = ""
        if solution.status is QPStatus.OPTIMAL:
            forces_o = unpack_forces(solution.y)
            self._held_forces = forces_o
            self._stale = 0
        elif self._held_forces is not None and self._stale < self.stale_limit:
            forces_o = self._held_forces
            self._stale += 1
            fallback = "held"
        else:
            forces_o = np.zeros((len(self.contacts), 3))
            fallback = "zero"
        forces_w = forces_o @ rot.T

        # tip references ride on the *desired* object pose
        rot_des = quat_to_matrix(desired.orientation)
        torque = np.zeros(NUM_JOINTS)
        tip_targets = np.zeros((len(self.contacts), 3))
        for i in range(NUM_FINGERS):
            contact = self.contacts.contacts[i]
            target = desired.position + rot_des @ contact.location
            target_vel = desired.velocity + np.cross(
                desired.angular_velocity, rot_des @ contact.location
            )
            tip_targets[i] = target
            sl = slice(3 * i, 3 * i + 3)
            torque[sl] = impedance_torques(
                self.geometry.fingers[i],
                joint_obs.position[sl],
                joint_obs.velocity[sl],
                forces_w[i],
                target,
                target_vel,
                self.tip_gains,
            )

        info = ControlStepInfo(
            wrench_world=np.concatenate([force_w, moment_w]),
            wrench_object=np.concatenate([force_o, moment_o]),
            forces_object=forces_o,
            forces_world=forces_w,
            tip_targets=tip_targets,
            qp=solution,
            fallback=fallback,
        )
        return HandAction(torque=torque), info
