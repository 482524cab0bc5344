"""Kinematics for one 3-DoF finger and the 120-degree three-finger layout.

Joint convention per finger (see README for a sketch):

* joint 0: yaw about the finger base's vertical (z) axis,
* joint 1: pitch about the yawed y axis,
* joint 2: pitch about an axis parallel to joint 1, at the end of link 1.

At ``q = (0, 0, 0)`` the finger hangs straight down from its base, so the
home tip sits ``l1 + l2`` below the mount.  Positive pitch swings the tip in
the base frame's -x direction.  Link lengths and mount geometry are pure
configuration; the defaults are plausible desk-robot values, not measured
ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .hand import JOINTS_PER_FINGER, NUM_FINGERS
from .rotations import rot_y, rot_z

DEFAULT_LINK_LENGTHS = (0.16, 0.16)  # m
DEFAULT_MOUNT_RADIUS = 0.15  # m
DEFAULT_MOUNT_HEIGHT = 0.30  # m

_Z = np.array([0.0, 0.0, 1.0])
_Y = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class FingerGeometry:
    link_lengths: tuple[float, float] = DEFAULT_LINK_LENGTHS
    base_rotation: np.ndarray = None
    base_translation: np.ndarray = None

    def __post_init__(self):
        rot = np.eye(3) if self.base_rotation is None else np.asarray(self.base_rotation, float)
        trans = np.zeros(3) if self.base_translation is None else np.asarray(self.base_translation, float)
        if rot.shape != (3, 3) or trans.shape != (3,):
            raise ValueError("base pose must be a 3x3 rotation and a 3-vector")
        l1, l2 = self.link_lengths
        if l1 <= 0 or l2 <= 0:
            raise ValueError("link lengths must be positive")
        rot = rot.copy()
        trans = trans.copy()
        rot.setflags(write=False)
        trans.setflags(write=False)
        object.__setattr__(self, "link_lengths", (float(l1), float(l2)))
        object.__setattr__(self, "base_rotation", rot)
        object.__setattr__(self, "base_translation", trans)

    @property
    def reach(self) -> float:
        return self.link_lengths[0] + self.link_lengths[1]


@dataclass(frozen=True)
class HandGeometry:
    """Three fingers with bases spaced 120 degrees apart on a mount circle."""

    fingers: tuple[FingerGeometry, FingerGeometry, FingerGeometry]

    def __post_init__(self):
        if len(self.fingers) != NUM_FINGERS:
            raise ValueError(f"expected {NUM_FINGERS} fingers")
        object.__setattr__(self, "fingers", tuple(self.fingers))

    @classmethod
    def symmetric(
        cls,
        link_lengths: tuple[float, float] = DEFAULT_LINK_LENGTHS,
        mount_radius: float = DEFAULT_MOUNT_RADIUS,
        mount_height: float = DEFAULT_MOUNT_HEIGHT,
    ) -> "HandGeometry":
        """Bases on a circle, each finger's base x axis facing the center."""
        fingers = []
        for i in range(NUM_FINGERS):
            angle = 2.0 * np.pi * i / NUM_FINGERS
            translation = np.array(
                [mount_radius * np.cos(angle), mount_radius * np.sin(angle), mount_height]
            )
            fingers.append(
                FingerGeometry(
                    link_lengths=link_lengths,
                    base_rotation=rot_z(angle + np.pi),
                    base_translation=translation,
                )
            )
        return cls(fingers=tuple(fingers))

    def finger_joints(self, q9, finger: int) -> np.ndarray:
        q9 = np.asarray(q9, dtype=float)
        return q9[finger * JOINTS_PER_FINGER : (finger + 1) * JOINTS_PER_FINGER]

    def tip_positions(self, q9) -> np.ndarray:
        """(3, 3) array of world tip positions for a 9-joint configuration."""
        return np.stack(
            [
                forward_kinematics(f, self.finger_joints(q9, i))
                for i, f in enumerate(self.fingers)
            ]
        )


def _check_q(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (JOINTS_PER_FINGER,):
        raise ValueError(f"expected a {JOINTS_PER_FINGER}-joint configuration")
    return q


def forward_kinematics(geom: FingerGeometry, q) -> np.ndarray:
    """World tip position of one finger."""
    q = _check_q(q)
    l1, l2 = geom.link_lengths
    s1, c1 = np.sin(q[1]), np.cos(q[1])
    s12, c12 = np.sin(q[1] + q[2]), np.cos(q[1] + q[2])
    # chain in the finger base frame: yaw, then two pitches in the x-z plane
    v = np.array([-l1 * s1 - l2 * s12, 0.0, -l1 * c1 - l2 * c12])
    return geom.base_rotation @ (rot_z(q[0]) @ v) + geom.base_translation


def jacobian(geom: FingerGeometry, q) -> np.ndarray:
    """3x3 position Jacobian d(tip)/dq in world coordinates.

    Built geometrically: each column is (world joint axis) x (tip - joint
    position); the two pitch axes stay parallel for all q.
    """
    q = _check_q(q)
    l1, l2 = geom.link_lengths
    base_r = geom.base_rotation
    base_t = geom.base_translation
    yawed = base_r @ rot_z(q[0])

    tip = forward_kinematics(geom, q)
    knee = base_t + yawed @ (rot_y(q[1]) @ np.array([0.0, 0.0, -l1]))

    axis_yaw = base_r @ _Z
    axis_pitch = yawed @ _Y

    return np.column_stack(
        [
            np.cross(axis_yaw, tip - base_t),
            np.cross(axis_pitch, tip - base_t),
            np.cross(axis_pitch, tip - knee),
        ]
    )


class IKResult(NamedTuple):
    q: np.ndarray
    reached: bool
    residual: float
    iterations: int


def inverse_kinematics(
    geom: FingerGeometry,
    target,
    q0,
    tolerance: float = 1e-5,
    damping: float = 1e-3,
    max_iterations: int = 200,
    max_step: float = 0.5,
) -> IKResult:
    """Damped-least-squares IK: q <- q + J^T (J J^T + damping^2 I)^-1 error.

    The damping adapts Levenberg-style: a step that does not reduce the
    residual is retried with ten times the damping, so the iteration
    decreases monotonically instead of oscillating near singular
    configurations.  Best-effort: for unreachable targets it settles on the
    workspace boundary and ``reached`` comes back False.
    """
    target = np.asarray(target, dtype=float)
    if target.shape != (3,) or not np.isfinite(target).all():
        raise ValueError("target must be a finite 3-vector")
    q = _check_q(q0).copy()
    eye3 = np.eye(3)
    lam = damping
    error = target - forward_kinematics(geom, q)
    residual = float(np.linalg.norm(error))
    iterations = 0
    for iteration in range(max_iterations):
        iterations = iteration
        if residual < tolerance:
            return IKResult(q, True, residual, iteration)
        jac = jacobian(geom, q)
        improved = False
        for _attempt in range(12):
            step = jac.T @ np.linalg.solve(jac @ jac.T + lam**2 * eye3, error)
            step_norm = float(np.linalg.norm(step))
            if step_norm > max_step:
                step *= max_step / step_norm
            q_try = q + step
            error_try = target - forward_kinematics(geom, q_try)
            residual_try = float(np.linalg.norm(error_try))
            if residual_try < residual:
                q, error, residual = q_try, error_try, residual_try
                lam = max(damping, lam / 3.0)
                improved = True
                break
            lam *= 10.0
        if not improved:
            break  # no damping improves: at a (possibly boundary) minimum
    return IKResult(q, residual < tolerance, residual, iterations)


def _point_jacobians(geom: FingerGeometry, q):
    """Jacobians of the two link midpoints (used for gravity torques)."""
    q = _check_q(q)
    l1, l2 = geom.link_lengths
    base_r = geom.base_rotation
    base_t = geom.base_translation
    yawed = base_r @ rot_z(q[0])
    axis_yaw = base_r @ _Z
    axis_pitch = yawed @ _Y

    down1 = yawed @ (rot_y(q[1]) @ np.array([0.0, 0.0, -1.0]))
    down2 = yawed @ (rot_y(q[1] + q[2]) @ np.array([0.0, 0.0, -1.0]))
    mid1 = base_t + 0.5 * l1 * down1
    knee = base_t + l1 * down1
    mid2 = knee + 0.5 * l2 * down2

    jac1 = np.column_stack(
        [
            np.cross(axis_yaw, mid1 - base_t),
            np.cross(axis_pitch, mid1 - base_t),
            np.zeros(3),  # q2 does not move points on link 1
        ]
    )
    jac2 = np.column_stack(
        [
            np.cross(axis_yaw, mid2 - base_t),
            np.cross(axis_pitch, mid2 - base_t),
            np.cross(axis_pitch, mid2 - knee),
        ]
    )
    return jac1, jac2


def gravity_torque(
    geom: FingerGeometry, q, link_masses=(0.2, 0.2), gravity=(0.0, 0.0, -9.81)
) -> np.ndarray:
    """Generalized gravity load g(q) with point masses at the link midpoints.

    Sign convention: joint dynamics read ``I qdd = tau - b qd - g(q)``, so a
    command ``tau = g(q)`` holds the finger static.
    """
    gravity = np.asarray(gravity, dtype=float)
    jac1, jac2 = _point_jacobians(geom, q)
    m1, m2 = link_masses
    return -(jac1.T @ (m1 * gravity) + jac2.T @ (m2 * gravity))
