"""Small rotation utilities: axis rotations and unit quaternions.

Quaternions are stored scalar-first as ``[w, x, y, z]`` numpy arrays.  Only
the handful of operations the controller and rigid-body integrator need are
implemented, with deterministic elementwise formulas.
"""

from __future__ import annotations

import numpy as np


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def identity_quat() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q)


def quat_multiply(a, b) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q) -> np.ndarray:
    w, x, y, z = q
    return np.array([w, -x, -y, -z])


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    return np.concatenate(([np.cos(half)], np.sin(half) * axis))


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_rotate(q, v) -> np.ndarray:
    return quat_to_matrix(q) @ np.asarray(v, dtype=float)


def quat_integrate(q, omega, dt: float) -> np.ndarray:
    """One Euler step of qdot = 1/2 * omega_quat * q, renormalized.

    ``omega`` is the world-frame angular velocity.
    """
    omega_quat = np.array([0.0, omega[0], omega[1], omega[2]])
    q_new = np.asarray(q, dtype=float) + 0.5 * dt * quat_multiply(omega_quat, q)
    return quat_normalize(q_new)


def rotation_error_vector(q_desired, q_actual) -> np.ndarray:
    """3-vector orientation error taking ``q_actual`` toward ``q_desired``.

    Vector part of the world-frame error quaternion scaled by
    ``2 * sign(scalar part)``: for small errors this equals the axis-angle
    rotation vector, and the sign flip picks the short way around.
    """
    err = quat_multiply(q_desired, quat_conjugate(q_actual))
    sign = 1.0 if err[0] >= 0.0 else -1.0
    return 2.0 * sign * err[1:]


def skew(v) -> np.ndarray:
    """Cross-product matrix: skew(v) @ u == v x u."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
